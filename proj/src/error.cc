#include "cwp/error.h"

namespace cwp {
namespace {

std::string with_ids(const std::string& what, const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 20;
  std::string out = what + " (" + std::to_string(ids.size()) + " ids: ";
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  if (ids.size() > kShown) out += ", ...";
  out += ")";
  return out;
}

}  // namespace

IdListError::IdListError(const std::string& what, std::vector<std::string> ids)
    : DataError(with_ids(what, ids)), ids_(std::move(ids)) {}

}  // namespace cwp
