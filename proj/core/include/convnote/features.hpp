#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "convnote/types.hpp"

namespace convnote {

// Sparse feature vector: (index, weight) pairs with strictly increasing
// indices and finite weights.
struct FeatureVector {
    std::vector<std::pair<int, double>> entries;
};

// TF-IDF vocabulary fitted on training conversations. Each utterance is one
// document; idf(t) = ln(N / df(t)) + 1. Context features concatenate the
// utterance's own L2-normalized tf-idf block with the means of the
// individually normalized blocks of up to `window` preceding and following
// utterances, so the dimension is 3V for window >= 1 and V for window 0.
struct FeatureSpace {
    std::vector<std::string> vocabulary;  // sorted unique tokens
    std::vector<double> idf;
    int window = 2;

    int tfidf_dim() const { return static_cast<int>(vocabulary.size()); }
    int feature_dim() const {
        return window > 0 ? 3 * tfidf_dim() : tfidf_dim();
    }
    const std::unordered_map<std::string, int>& index() const;

  private:
    mutable std::unordered_map<std::string, int> index_;
};

// Throws ValidationError on an empty training split.
FeatureSpace fit_feature_space(const std::vector<AnnotatedRecord>& train,
                               int window);

// L2-normalized tf-idf of one utterance (the self block). Unknown tokens
// are dropped; an utterance of only unknown tokens yields an empty vector.
FeatureVector tfidf_vector(const FeatureSpace& space,
                           const std::vector<std::string>& tokens);

FeatureVector utterance_features(const FeatureSpace& space,
                                 const Conversation& conversation,
                                 std::size_t utterance_index);

}  // namespace convnote
