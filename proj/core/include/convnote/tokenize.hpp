#pragma once

#include <string>
#include <vector>

namespace convnote {

// Lowercases and splits on whitespace and punctuation boundaries.
// Alphanumeric runs become single tokens; every punctuation character
// becomes its own token. "I take Aspirin, daily." ->
// {"i","take","aspirin",",","daily","."}
std::vector<std::string> tokenize(const std::string& text);

// Joins tokens with single spaces. tokenize(join(tokenize(t))) == tokenize(t).
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace convnote
