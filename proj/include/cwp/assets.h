#ifndef CWP_ASSETS_H_
#define CWP_ASSETS_H_

#include <string_view>

// Version-controlled data files compiled into the library (see assets/).
namespace cwp::assets {

std::string_view stopwords_en();
std::string_view verbs_en();
std::string_view verbs_irregular();
std::string_view gazetteer();

std::string_view prompt_refined();
std::string_view prompt_compressed();
std::string_view prompt_expanded();
std::string_view prompt_no_instruction();
std::string_view prompt_verb_classification();

}  // namespace cwp::assets

#endif  // CWP_ASSETS_H_
