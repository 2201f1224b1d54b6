#include "gywi/corpus.hpp"

#include <cctype>
#include <fstream>
#include <nlohmann/json.hpp>

#include "gywi/util.hpp"

namespace gywi::corpus {

using nlohmann::json;

AuthorId normalize_author(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    if (out.empty()) throw CorpusError("author name empty after normalization: \"" + raw + "\"");
    return AuthorId{out};
}

std::vector<AuthorId> PaperRecord::normalized_authors() const {
    std::vector<AuthorId> out;
    out.reserve(authors.size());
    for (const auto& a : authors) out.push_back(normalize_author(a));
    return out;
}

void PaperRecord::validate() const {
    if (id.empty()) throw CorpusError("paper record has empty id");
    if (title.empty()) throw CorpusError("paper " + id + ": empty title");
    if (authors.empty()) throw CorpusError("paper " + id + ": no authors");
    if (year < 1900 || year > 2100)
        throw CorpusError("paper " + id + ": year " + std::to_string(year) + " out of range [1900, 2100]");
}

void Corpus::add(PaperRecord record) {
    record.validate();
    if (records_.count(record.id)) throw CorpusError("duplicate paper id: " + record.id);
    order_.push_back(record.id);
    records_.emplace(record.id, std::move(record));
}

const PaperRecord& Corpus::get(const std::string& id) const {
    auto it = records_.find(id);
    if (it == records_.end()) throw CorpusError("unknown paper id: " + id);
    return it->second;
}

namespace {

PaperRecord record_from_json(const json& j) {
    PaperRecord rec;
    for (const char* field : {"id", "title", "abstract", "authors", "year"}) {
        if (!j.contains(field)) throw CorpusError(std::string("missing required field '") + field + "'");
    }
    rec.id = j.at("id").get<std::string>();
    rec.title = j.at("title").get<std::string>();
    rec.abstract_text = j.at("abstract").get<std::string>();
    rec.authors = j.at("authors").get<std::vector<std::string>>();
    rec.year = j.at("year").get<int>();
    if (j.contains("body") && !j.at("body").is_null()) rec.body = j.at("body").get<std::string>();
    return rec;
}

json record_to_json(const PaperRecord& rec) {
    json j{{"id", rec.id},
           {"title", rec.title},
           {"abstract", rec.abstract_text},
           {"authors", rec.authors},
           {"year", rec.year}};
    if (rec.body) j["body"] = *rec.body;
    return j;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot read corpus file: " + path);
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        try {
            corpus.add(record_from_json(j));
        } catch (const CorpusError& e) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
            throw CorpusError(path + ":" + std::to_string(line_no) + ": bad field type: " + e.what());
        }
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot write corpus file: " + path);
    for (const auto& id : corpus.ids()) {
        out << record_to_json(corpus.get(id)).dump() << '\n';
    }
    if (!out) throw CorpusError("write failure on corpus file: " + path);
}

}  // namespace gywi::corpus
