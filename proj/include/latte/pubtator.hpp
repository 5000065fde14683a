#pragma once

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "latte/data.hpp"
#include "latte/errors.hpp"
#include "latte/vocab.hpp"

namespace latte {

// One-way import of PubTator-format corpora (MedMentions layout):
//   PMID|t|title
//   PMID|a|abstract
//   PMID<TAB>start<TAB>end<TAB>mention<TAB>types<TAB>entity id
// Documents are blank-line separated. Mention offsets index into
// title + " " + abstract. Entity names are the first surface form seen for
// each id; known types come from the comma-separated type field.
struct PubtatorImport {
    Dataset dataset;
    std::size_t documents = 0;
    std::map<std::string, std::size_t> documents_per_split;
    std::map<std::string, std::size_t> mentions_per_split;
};

namespace pubtator_detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) out.push_back(field);
    return out;
}

inline std::set<std::string> load_pmid_list(const std::string& path) {
    std::set<std::string> out;
    if (path.empty()) return out;
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open PMID list: " + path);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) out.insert(line);
    }
    return out;
}

// up to 5 tokens on each side of [start, end) within the document text
inline std::pair<std::vector<std::string>, std::vector<std::string>>
context_window(const std::string& text, std::size_t start, std::size_t end) {
    std::string left_raw = start <= text.size() ? text.substr(0, start) : text;
    std::string right_raw = end <= text.size() ? text.substr(end) : "";
    auto left = tokenize(left_raw);
    auto right = tokenize(right_raw);
    if (left.size() > 5) left.erase(left.begin(), left.end() - 5);
    if (right.size() > 5) right.resize(5);
    return {left, right};
}

}  // namespace pubtator_detail

// train/dev/test PMID list paths may be empty; unlisted documents default
// to the train split.
inline PubtatorImport import_pubtator(const std::string& path,
                                      const std::string& train_pmids_path = "",
                                      const std::string& dev_pmids_path = "",
                                      const std::string& test_pmids_path = "") {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open PubTator file: " + path);
    auto dev_pmids = pubtator_detail::load_pmid_list(dev_pmids_path);
    auto test_pmids = pubtator_detail::load_pmid_list(test_pmids_path);
    auto train_pmids = pubtator_detail::load_pmid_list(train_pmids_path);

    PubtatorImport out;
    std::map<std::string, std::string> entity_name;   // id -> first surface
    std::map<std::string, std::set<std::string>> entity_types;
    std::map<std::string, std::size_t> type_ids;      // type string -> id
    struct RawMention {
        std::string pmid, split, surface, entity_id;
        std::vector<std::string> left, right;
        std::set<std::string> types;
    };
    std::vector<RawMention> raw;

    std::string line, pmid, title, abstract_;
    std::size_t ln = 0;
    auto split_of = [&](const std::string& id) -> std::string {
        if (dev_pmids.count(id)) return "dev";
        if (test_pmids.count(id)) return "test";
        if (test_pmids.empty() && dev_pmids.empty()) return "train";
        if (train_pmids.count(id) || train_pmids.empty()) return "train";
        return "train";
    };
    auto flush_doc = [&]() {
        if (pmid.empty()) return;
        ++out.documents;
        ++out.documents_per_split[split_of(pmid)];
        pmid.clear();
        title.clear();
        abstract_.clear();
    };

    while (std::getline(in, line)) {
        ++ln;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush_doc();
            continue;
        }
        const auto bar1 = line.find('|');
        const auto tab1 = line.find('\t');
        if (bar1 != std::string::npos &&
            (tab1 == std::string::npos || bar1 < tab1)) {
            const auto bar2 = line.find('|', bar1 + 1);
            if (bar2 == std::string::npos)
                throw FormatError(path + ":" + std::to_string(ln) +
                                  ": malformed title/abstract line");
            const std::string id = line.substr(0, bar1);
            const std::string kind = line.substr(bar1 + 1, bar2 - bar1 - 1);
            if (pmid.empty()) pmid = id;
            if (kind == "t")
                title = line.substr(bar2 + 1);
            else if (kind == "a")
                abstract_ = line.substr(bar2 + 1);
            else
                throw FormatError(path + ":" + std::to_string(ln) +
                                  ": unknown section '" + kind + "'");
            continue;
        }
        auto fields = pubtator_detail::split_tabs(line);
        if (fields.size() < 6)
            throw FormatError(path + ":" + std::to_string(ln) +
                              ": expected 6 tab-separated fields, got " +
                              std::to_string(fields.size()));
        std::size_t start = 0, end = 0;
        try {
            start = std::stoul(fields[1]);
            end = std::stoul(fields[2]);
        } catch (const std::exception&) {
            throw FormatError(path + ":" + std::to_string(ln) +
                              ": non-numeric mention offsets");
        }
        RawMention m;
        m.pmid = fields[0];
        m.split = split_of(m.pmid);
        m.surface = fields[3];
        m.entity_id = fields[5];
        std::istringstream ts(fields[4]);
        std::string t;
        while (std::getline(ts, t, ','))
            if (!t.empty()) m.types.insert(t);
        const std::string text = title + " " + abstract_;
        std::tie(m.left, m.right) =
            pubtator_detail::context_window(text, start, end);
        if (!entity_name.count(m.entity_id))
            entity_name[m.entity_id] = m.surface;
        entity_types[m.entity_id].insert(m.types.begin(), m.types.end());
        for (const auto& ty : m.types)
            if (!type_ids.count(ty)) type_ids[ty] = 0;
        raw.push_back(std::move(m));
    }
    flush_doc();

    std::size_t next = 0;
    for (auto& [name, id] : type_ids) id = next++;
    for (const auto& [name, id] : type_ids)
        out.dataset.type_names[id] = name;

    for (const auto& [id, name] : entity_name) {
        CandidateEntity e;
        e.entity_id = id;
        e.name = name;
        for (const auto& ty : entity_types[id])
            e.known_type_ids.insert(type_ids[ty]);
        out.dataset.kb.add(std::move(e));
    }
    for (const auto& m : raw) {
        MentionRecord rec;
        rec.doc_id = m.pmid;
        rec.split = m.split;
        rec.mention = m.surface;
        rec.left_context = m.left;
        rec.right_context = m.right;
        rec.gold_entity_id = m.entity_id;
        for (const auto& ty : m.types)
            rec.known_type_ids.insert(type_ids[ty]);
        ++out.mentions_per_split[rec.split];
        out.dataset.mentions.push_back(std::move(rec));
    }
    return out;
}

}  // namespace latte
