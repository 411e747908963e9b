#include "convnote/soundex.hpp"

#include <algorithm>
#include <cctype>

#include "convnote/error.hpp"

namespace convnote {

namespace {

char letter_digit(char c) {
    switch (c) {
        case 'b': case 'p': return '1';
        case 'f': case 'v': return '2';
        case 'c': case 'k': case 's': return '3';
        case 'g': case 'j': return '4';
        case 'q': case 'x': case 'z': return '5';
        case 'd': case 't': return '6';
        case 'l': return '7';
        case 'm': case 'n': return '8';
        case 'r': return '9';
        default: return '0';  // vowels, h, w, y
    }
}

}  // namespace

std::string refined_soundex_encode(const std::string& word) {
    std::string letters;
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            letters.push_back(
                static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (letters.empty()) {
        throw ValidationError("cannot phonetically encode: " + word);
    }
    std::string code;
    code.push_back(letters[0]);
    for (char c : letters) {
        char digit = letter_digit(c);
        if (code.size() > 1 && code.back() == digit) continue;
        code.push_back(digit);
    }
    return code;
}

int levenshtein(const std::string& a, const std::string& b) {
    std::vector<int> prev(b.size() + 1);
    std::vector<int> curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j) {
            int substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, substitution});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

int phonetic_distance(const std::string& word_a, const std::string& word_b) {
    return levenshtein(refined_soundex_encode(word_a),
                       refined_soundex_encode(word_b));
}

std::vector<std::string> candidate_set(
    const std::string& word, const std::vector<std::string>& lexicon) {
    std::string code = refined_soundex_encode(word);
    std::vector<std::string> candidates;
    for (const std::string& other : lexicon) {
        if (other == word) continue;
        if (levenshtein(code, refined_soundex_encode(other)) == 1) {
            candidates.push_back(other);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
    return candidates;
}

}  // namespace convnote
