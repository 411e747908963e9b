#include "convnote/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "convnote/error.hpp"

namespace convnote {

std::string speaker_tag(const std::string& speaker) {
    std::string tag = "<spk_";
    for (char c : speaker)
        tag += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    tag += ">";
    return tag;
}

bool is_speaker_tag(const std::string& token) {
    return token.size() > 6 && token.rfind("<spk_", 0) == 0 && token.back() == '>';
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = ids.find(token);
    return it == ids.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(int id) const {
    return tokens.at(static_cast<std::size_t>(id));
}

bool Vocabulary::is_header(int id) const {
    return id >= 4 && id < 4 + scheme.size();
}

int Vocabulary::header_id(const std::string& section_id) const {
    int at = scheme.index_of(section_id);
    if (at < 0) throw ConfigError("unknown section id: " + section_id);
    return 4 + at;
}

std::vector<int> Vocabulary::header_ids() const {
    std::vector<int> out;
    for (int i = 0; i < scheme.size(); ++i) out.push_back(4 + i);
    return out;
}

Vocabulary Vocabulary::from_tokens(SectionScheme scheme, std::vector<std::string> tokens,
                                   int n_reserved) {
    Vocabulary vocab;
    vocab.scheme = std::move(scheme);
    vocab.tokens = std::move(tokens);
    vocab.n_reserved = n_reserved;
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
        vocab.ids.emplace(vocab.tokens[i], static_cast<int>(i));
    return vocab;
}

Vocabulary build_vocab(const std::vector<AbstractorPair>& pairs, const SectionScheme& scheme,
                       int min_count) {
    if (pairs.empty()) throw ValidationError("cannot build a vocabulary from no pairs");

    std::map<std::string, long> counts;
    std::set<std::string> tags;
    for (const auto& pair : pairs) {
        for (const auto* side : {&pair.input_tokens, &pair.target_tokens}) {
            for (const auto& token : *side) {
                if (is_speaker_tag(token))
                    tags.insert(token);
                else
                    ++counts[token];
            }
        }
    }

    std::vector<std::string> tokens = {"<pad>", "<bos>", "<eos>", "<unk>"};
    for (const auto& [id, header] : scheme.sections) tokens.push_back(header);
    tokens.insert(tokens.end(), tags.begin(), tags.end());
    int n_reserved = static_cast<int>(tokens.size());

    std::set<std::string> reserved(tokens.begin(), tokens.end());
    std::vector<std::pair<std::string, long>> content(counts.begin(), counts.end());
    std::sort(content.begin(), content.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [token, count] : content) {
        if (count < min_count || reserved.count(token)) continue;
        tokens.push_back(token);
    }
    return Vocabulary::from_tokens(scheme, std::move(tokens), n_reserved);
}

ExtendedExample extend_source(const Vocabulary& vocab,
                              const std::vector<std::string>& source_tokens) {
    ExtendedExample ext;
    std::map<std::string, int> oov_ids;
    for (const auto& token : source_tokens) {
        int id = vocab.id_of(token);
        ext.source_ids.push_back(id);
        if (id != Vocabulary::kUnk) {
            ext.source_ext_ids.push_back(id);
            continue;
        }
        auto it = oov_ids.find(token);
        if (it == oov_ids.end()) {
            it = oov_ids.emplace(token, static_cast<int>(ext.oov_tokens.size())).first;
            ext.oov_tokens.push_back(token);
        }
        ext.source_ext_ids.push_back(vocab.size() + it->second);
    }
    return ext;
}

std::vector<int> target_ext_ids(const Vocabulary& vocab, const ExtendedExample& ext,
                                const std::vector<std::string>& target_tokens) {
    std::vector<int> out;
    out.reserve(target_tokens.size());
    for (const auto& token : target_tokens) {
        int id = vocab.id_of(token);
        if (id != Vocabulary::kUnk) {
            out.push_back(id);
            continue;
        }
        auto at = std::find(ext.oov_tokens.begin(), ext.oov_tokens.end(), token);
        if (at == ext.oov_tokens.end())
            out.push_back(Vocabulary::kUnk);
        else
            out.push_back(vocab.size() + static_cast<int>(at - ext.oov_tokens.begin()));
    }
    return out;
}

const std::string& ext_token(const Vocabulary& vocab, const ExtendedExample& ext, int ext_id) {
    if (ext_id < vocab.size()) return vocab.token_of(ext_id);
    return ext.oov_tokens.at(static_cast<std::size_t>(ext_id - vocab.size()));
}

}  // namespace convnote
