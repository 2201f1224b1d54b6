#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gywi::corpus {

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Normalized author identity: lowercase, single internal spaces, trimmed.
/// Exact string match is the identity rule; homonyms are not disambiguated.
struct AuthorId {
    std::string canonical;

    auto operator<=>(const AuthorId&) const = default;
};

AuthorId normalize_author(const std::string& raw);

struct PaperRecord {
    std::string id;
    std::string title;
    std::string abstract_text;
    std::vector<std::string> authors;
    int year = 0;
    std::optional<std::string> body;

    /// Text used for chunking: body when present, abstract otherwise.
    const std::string& content_text() const { return body ? *body : abstract_text; }

    std::vector<AuthorId> normalized_authors() const;

    void validate() const;
};

/// Immutable after load; iteration follows insertion order deterministically.
class Corpus {
public:
    void add(PaperRecord record);

    bool has(const std::string& id) const { return records_.count(id) != 0; }
    const PaperRecord& get(const std::string& id) const;
    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }

    /// Ids in insertion order.
    const std::vector<std::string>& ids() const { return order_; }

private:
    std::map<std::string, PaperRecord> records_;
    std::vector<std::string> order_;
};

/// Loads a JSON-lines corpus file. Malformed lines are reported with their
/// line number; duplicate ids are an error.
Corpus load_corpus(const std::string& path);

/// Writes one JSON record per line. load_corpus(save_corpus(c)) == c field-for-field.
void save_corpus(const Corpus& corpus, const std::string& path);

}  // namespace gywi::corpus
