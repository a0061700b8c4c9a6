#include "cowtopo/cow_class.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cowtopo/errors.hpp"

namespace cowtopo {

namespace {

constexpr std::array<std::string_view, kNumCowClasses> kNames{
    "BA",     "R-PCA",  "L-PCA", "R-ICA", "R-MCA", "L-ICA", "L-MCA",
    "R-Pcom", "L-Pcom", "Acom",  "R-ACA", "L-ACA", "3rd-A2"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view class_name(CowClass c) { return kNames[class_index(c)]; }

std::optional<CowClass> parse_class(std::string_view name) {
  for (CowClass c : kAllCowClasses)
    if (iequals(class_name(c), name)) return c;
  return std::nullopt;
}

ClassMap::ClassMap() {
  for (std::size_t i = 0; i < kNumCowClasses; ++i) ids_[i] = static_cast<LabelId>(i + 1);
}

ClassMap::ClassMap(const std::array<LabelId, kNumCowClasses>& ids) : ids_(ids) {}

std::optional<CowClass> ClassMap::class_of(LabelId id) const {
  for (std::size_t i = 0; i < kNumCowClasses; ++i)
    if (ids_[i] == id) return kAllCowClasses[i];
  return std::nullopt;
}

ClassMap ClassMap::from_json_text(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("class map: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("class map must be a JSON object");

  std::array<LabelId, kNumCowClasses> ids{};
  std::array<bool, kNumCowClasses> seen{};
  for (const auto& [key, value] : j.items()) {
    const auto c = parse_class(key);
    if (!c) throw ValidationError("class map: unknown class '" + key + "'");
    if (!value.is_number_integer() || value.get<long long>() <= 0 ||
        value.get<long long>() > 65535)
      throw ValidationError("class map: id for '" + key + "' must be an integer in [1, 65535]");
    ids[class_index(*c)] = static_cast<LabelId>(value.get<long long>());
    seen[class_index(*c)] = true;
  }
  for (std::size_t i = 0; i < kNumCowClasses; ++i)
    if (!seen[i])
      throw ValidationError("class map: missing class '" + std::string(kNames[i]) + "'");
  if (std::set<LabelId>(ids.begin(), ids.end()).size() != kNumCowClasses)
    throw ValidationError("class map: ids must be distinct");
  return ClassMap(ids);
}

ClassMap ClassMap::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read class map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

}  // namespace cowtopo
