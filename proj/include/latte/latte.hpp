#pragma once

#include "latte/adam.hpp"
#include "latte/config.hpp"
#include "latte/data.hpp"
#include "latte/embedding.hpp"
#include "latte/errors.hpp"
#include "latte/losses.hpp"
#include "latte/lstm.hpp"
#include "latte/match.hpp"
#include "latte/metrics.hpp"
#include "latte/model.hpp"
#include "latte/pubtator.hpp"
#include "latte/synth.hpp"
#include "latte/tensor.hpp"
#include "latte/trainer.hpp"
#include "latte/vocab.hpp"
