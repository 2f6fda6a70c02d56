#pragma once

#include <string_view>

// Fixed prompt fragments shared by the prompt builders and the offline
// providers that answer them.
namespace tvdigest::prompts {

inline constexpr std::string_view kAnchorInstruction =
    "Extract computer specific terms from sentence: ";
inline constexpr std::string_view kMergeTask =
    "Based on information entropy, I can merge sentence_list.";
inline constexpr std::string_view kSentenceList = "Sentence_list: ";
inline constexpr std::string_view kEntropyLine = "Information entropy: ";
inline constexpr std::string_view kMergeResult = "Merge result";

inline constexpr std::string_view kTagExtract = "extract";
inline constexpr std::string_view kTagAnchor = "anchor";
inline constexpr std::string_view kTagMerge = "merge";

}  // namespace tvdigest::prompts
