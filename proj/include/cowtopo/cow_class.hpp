#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace cowtopo {

/// The 13 labelled Circle-of-Willis vessel segments. The enumerator order is
/// the default label-id order (BA = 1 ... ThirdA2 = 13).
enum class CowClass : std::uint8_t {
  BA,
  RPCA,
  LPCA,
  RICA,
  RMCA,
  LICA,
  LMCA,
  RPcom,
  LPcom,
  Acom,
  RACA,
  LACA,
  ThirdA2,
};

inline constexpr std::size_t kNumCowClasses = 13;
/// Foreground classes plus background.
inline constexpr std::size_t kNumChannels = kNumCowClasses + 1;

inline constexpr std::array<CowClass, kNumCowClasses> kAllCowClasses{
    CowClass::BA,   CowClass::RPCA,  CowClass::LPCA, CowClass::RICA, CowClass::RMCA,
    CowClass::LICA, CowClass::LMCA,  CowClass::RPcom, CowClass::LPcom, CowClass::Acom,
    CowClass::RACA, CowClass::LACA,  CowClass::ThirdA2};

constexpr std::size_t class_index(CowClass c) { return static_cast<std::size_t>(c); }

std::string_view class_name(CowClass c);
/// Accepts the canonical names ("R-Pcom", "3rd-A2", ...) case-insensitively.
std::optional<CowClass> parse_class(std::string_view name);

using LabelId = std::uint16_t;

/// Mapping between classes and the integer ids stored in label volumes.
class ClassMap {
 public:
  /// Enumeration order, 1..13.
  ClassMap();

  /// Reads `{ "BA": 1, "R-PCA": 2, ... }`. Every class must be listed once
  /// with a distinct nonzero id.
  static ClassMap from_json_file(const std::filesystem::path& path);
  static ClassMap from_json_text(std::string_view text);

  LabelId id(CowClass c) const { return ids_[class_index(c)]; }
  std::optional<CowClass> class_of(LabelId id) const;
  bool is_valid_label(LabelId id) const { return id == 0 || class_of(id).has_value(); }

  friend bool operator==(const ClassMap&, const ClassMap&) = default;

 private:
  explicit ClassMap(const std::array<LabelId, kNumCowClasses>& ids);
  std::array<LabelId, kNumCowClasses> ids_{};
};

}  // namespace cowtopo
