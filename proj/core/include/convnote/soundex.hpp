#pragma once

#include <string>
#include <vector>

namespace convnote {

// Refined Soundex: first letter kept, then one digit per letter (including
// the first) from the table b,p=1 f,v=2 c,k,s=3 g,j=4 q,x,z=5 d,t=6 l=7
// m,n=8 r=9 vowels,h,w,y=0; adjacent duplicate digits collapsed; never
// truncated. Non-alphabetic characters are stripped first; an input with no
// letters throws ValidationError.
std::string refined_soundex_encode(const std::string& word);

int levenshtein(const std::string& a, const std::string& b);

// Levenshtein distance between the two Refined Soundex codes.
int phonetic_distance(const std::string& word_a, const std::string& word_b);

// Lexicon words w != word at phonetic distance exactly 1, lexicographic.
std::vector<std::string> candidate_set(const std::string& word,
                                       const std::vector<std::string>& lexicon);

}  // namespace convnote
