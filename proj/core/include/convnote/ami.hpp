#pragma once

#include <string>

#include "convnote/types.hpp"

namespace convnote {

// Ingests one meeting from the simplified three-file AMI export:
//   transcript: meeting_id \t utterance_index \t speaker \t text
//   summary:    meeting_id \t sentence_index \t section \t text
//   links:      meeting_id \t sentence_index \t utterance_index
// Summary sentences with zero linked utterances are dropped. All three
// files must describe a single meeting.
AnnotatedRecord ingest_ami(const std::string& transcript_path, const std::string& summary_path,
                           const std::string& link_path, const SectionScheme& scheme,
                           Split split);

}  // namespace convnote
