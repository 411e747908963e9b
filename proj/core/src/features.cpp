#include "convnote/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "convnote/error.hpp"

namespace convnote {

const std::unordered_map<std::string, int>& FeatureSpace::index() const {
    if (index_.empty() && !vocabulary.empty()) {
        for (std::size_t i = 0; i < vocabulary.size(); ++i) {
            index_.emplace(vocabulary[i], static_cast<int>(i));
        }
    }
    return index_;
}

FeatureSpace fit_feature_space(const std::vector<AnnotatedRecord>& train,
                               int window) {
    if (train.empty()) {
        throw ValidationError("feature space requires a nonempty training split");
    }
    std::map<std::string, long> df;
    long n_documents = 0;
    for (const auto& record : train) {
        for (const auto& utterance : record.conversation.utterances) {
            ++n_documents;
            std::set<std::string> seen(utterance.tokens.begin(),
                                       utterance.tokens.end());
            for (const auto& token : seen) ++df[token];
        }
    }
    FeatureSpace space;
    space.window = window;
    space.vocabulary.reserve(df.size());
    space.idf.reserve(df.size());
    for (const auto& [token, count] : df) {
        space.vocabulary.push_back(token);
        space.idf.push_back(
            std::log(static_cast<double>(n_documents) / count) + 1.0);
    }
    return space;
}

FeatureVector tfidf_vector(const FeatureSpace& space,
                           const std::vector<std::string>& tokens) {
    const auto& index = space.index();
    std::map<int, double> weights;
    for (const auto& token : tokens) {
        auto it = index.find(token);
        if (it != index.end()) weights[it->second] += space.idf[it->second];
    }
    double norm = 0.0;
    for (const auto& [i, w] : weights) norm += w * w;
    norm = std::sqrt(norm);
    FeatureVector vec;
    vec.entries.reserve(weights.size());
    for (const auto& [i, w] : weights) {
        vec.entries.emplace_back(i, norm > 0.0 ? w / norm : 0.0);
    }
    return vec;
}

namespace {

// Mean of the individually normalized tf-idf blocks of the neighbours in
// [begin, end), written into the accumulator at the given offset.
void pool_block(const FeatureSpace& space, const Conversation& conversation,
                long begin, long end, int offset,
                std::map<int, double>& accumulator) {
    long lo = std::max<long>(begin, 0);
    long hi = std::min<long>(end, static_cast<long>(conversation.size()));
    long count = hi - lo;
    if (count <= 0) return;
    for (long i = lo; i < hi; ++i) {
        auto block = tfidf_vector(space, conversation.utterances[i].tokens);
        for (const auto& [index, weight] : block.entries) {
            accumulator[offset + index] += weight / static_cast<double>(count);
        }
    }
}

}  // namespace

FeatureVector utterance_features(const FeatureSpace& space,
                                 const Conversation& conversation,
                                 std::size_t utterance_index) {
    auto self = tfidf_vector(space,
                             conversation.utterances[utterance_index].tokens);
    if (space.window <= 0) return self;
    std::map<int, double> combined(self.entries.begin(), self.entries.end());
    int v = space.tfidf_dim();
    long at = static_cast<long>(utterance_index);
    pool_block(space, conversation, at - space.window, at, v, combined);
    pool_block(space, conversation, at + 1, at + 1 + space.window, 2 * v,
               combined);
    FeatureVector vec;
    vec.entries.assign(combined.begin(), combined.end());
    return vec;
}

}  // namespace convnote
