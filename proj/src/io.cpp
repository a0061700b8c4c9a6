#include "cowtopo/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include <json.hpp>

namespace cowtopo {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code, sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4], srow_y[4], srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348);

enum class DType { U8, I8, I16, U16, I32, U32, I64, U64, F32, F64 };

struct DTypeInfo {
  DType type;
  std::int16_t nifti_code;
  std::size_t bytes;
  const char* name;
  bool integral;
};

constexpr DTypeInfo kDTypes[] = {
    {DType::U8, 2, 1, "uint8", true},      {DType::I8, 256, 1, "int8", true},
    {DType::I16, 4, 2, "int16", true},     {DType::U16, 512, 2, "uint16", true},
    {DType::I32, 8, 4, "int32", true},     {DType::U32, 768, 4, "uint32", true},
    {DType::I64, 1024, 8, "int64", true},  {DType::U64, 1280, 8, "uint64", true},
    {DType::F32, 16, 4, "float32", false}, {DType::F64, 64, 8, "float64", false},
};

const DTypeInfo& info(DType t) {
  for (const auto& d : kDTypes)
    if (d.type == t) return d;
  throw IoError("unknown dtype");
}

const DTypeInfo& info_from_nifti(std::int16_t code) {
  for (const auto& d : kDTypes)
    if (d.nifti_code == code) return d;
  throw IoError("unsupported NIfTI datatype " + std::to_string(code));
}

const DTypeInfo& info_from_name(const std::string& name) {
  for (const auto& d : kDTypes)
    if (name == d.name) return d;
  throw IoError("unsupported dtype '" + name + "'");
}

/// Decoded image: values widened to double (exact for every supported type
/// except 64-bit integers above 2^53).
struct RawImage {
  Shape shape;
  std::size_t channels = 1;
  Spacing spacing;
  WorldMeta world;
  DType dtype = DType::F32;
  std::vector<double> values;
};

template <class T>
void decode_as(const unsigned char* src, std::size_t n, bool swap, std::vector<double>& out) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, src + i * sizeof(T), sizeof(T));
    if (swap) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    out[i] = static_cast<double>(v);
  }
}

void decode(DType t, const unsigned char* src, std::size_t n, bool swap, std::vector<double>& out) {
  switch (t) {
    case DType::U8: return decode_as<std::uint8_t>(src, n, swap, out);
    case DType::I8: return decode_as<std::int8_t>(src, n, swap, out);
    case DType::I16: return decode_as<std::int16_t>(src, n, swap, out);
    case DType::U16: return decode_as<std::uint16_t>(src, n, swap, out);
    case DType::I32: return decode_as<std::int32_t>(src, n, swap, out);
    case DType::U32: return decode_as<std::uint32_t>(src, n, swap, out);
    case DType::I64: return decode_as<std::int64_t>(src, n, swap, out);
    case DType::U64: return decode_as<std::uint64_t>(src, n, swap, out);
    case DType::F32: return decode_as<float>(src, n, swap, out);
    case DType::F64: return decode_as<double>(src, n, swap, out);
  }
}

template <class T>
void encode_as(std::span<const double> values, std::string& out) {
  const std::size_t base = out.size();
  out.resize(base + values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T v = static_cast<T>(values[i]);
    std::memcpy(out.data() + base + i * sizeof(T), &v, sizeof(T));
  }
}

void encode(DType t, std::span<const double> values, std::string& out) {
  switch (t) {
    case DType::U8: return encode_as<std::uint8_t>(values, out);
    case DType::I8: return encode_as<std::int8_t>(values, out);
    case DType::I16: return encode_as<std::int16_t>(values, out);
    case DType::U16: return encode_as<std::uint16_t>(values, out);
    case DType::I32: return encode_as<std::int32_t>(values, out);
    case DType::U32: return encode_as<std::uint32_t>(values, out);
    case DType::I64: return encode_as<std::int64_t>(values, out);
    case DType::U64: return encode_as<std::uint64_t>(values, out);
    case DType::F32: return encode_as<float>(values, out);
    case DType::F64: return encode_as<double>(values, out);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

enum class Format { Nifti, NiftiGz, Fixture };

Format format_of(const fs::path& path) {
  const std::string p = path.string();
  if (ends_with(p, ".nii.gz")) return Format::NiftiGz;
  if (ends_with(p, ".nii")) return Format::Nifti;
  if (ends_with(p, ".json") || ends_with(p, ".bin")) return Format::Fixture;
  throw IoError("unsupported file extension: " + p);
}

std::string read_all_gz(const fs::path& path) {
  // gzread is transparent for uncompressed input.
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw IoError("cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw IoError("read error in " + path.string());
  return out;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const fs::path& path, const std::string& bytes, bool gz) {
  if (gz) {
    gzFile f = gzopen(path.string().c_str(), "wb6");
    if (!f) throw IoError("cannot write " + path.string());
    std::size_t off = 0;
    bool ok = true;
    while (off < bytes.size() && ok) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
      ok = gzwrite(f, bytes.data() + off, chunk) == static_cast<int>(chunk);
      off += chunk;
    }
    if (gzclose(f) != Z_OK || !ok) throw IoError("write error in " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error in " + path.string());
}

template <class T>
void byteswap_inplace(T& v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  std::reverse(buf, buf + sizeof(T));
  std::memcpy(&v, buf, sizeof(T));
}

void swap_header(Nifti1Header& h) {
  byteswap_inplace(h.sizeof_hdr);
  for (auto& d : h.dim) byteswap_inplace(d);
  byteswap_inplace(h.datatype);
  byteswap_inplace(h.bitpix);
  for (auto& p : h.pixdim) byteswap_inplace(p);
  byteswap_inplace(h.vox_offset);
  byteswap_inplace(h.scl_slope);
  byteswap_inplace(h.scl_inter);
  byteswap_inplace(h.qform_code);
  byteswap_inplace(h.sform_code);
  byteswap_inplace(h.quatern_b);
  byteswap_inplace(h.quatern_c);
  byteswap_inplace(h.quatern_d);
  byteswap_inplace(h.qoffset_x);
  byteswap_inplace(h.qoffset_y);
  byteswap_inplace(h.qoffset_z);
  for (auto& v : h.srow_x) byteswap_inplace(v);
  for (auto& v : h.srow_y) byteswap_inplace(v);
  for (auto& v : h.srow_z) byteswap_inplace(v);
}

RawImage read_nifti(const fs::path& path) {
  const std::string bytes = read_all_gz(path);
  if (bytes.size() < sizeof(Nifti1Header)) throw IoError("truncated NIfTI header in " + path.string());
  Nifti1Header h;
  std::memcpy(&h, bytes.data(), sizeof(h));
  bool swap = false;
  if (h.sizeof_hdr != 348) {
    swap_header(h);
    swap = true;
    if (h.sizeof_hdr != 348) throw IoError("not a NIfTI-1 file: " + path.string());
  }
  if (std::memcmp(h.magic, "n+1", 4) != 0)
    throw IoError("only single-file NIfTI-1 (n+1) is supported: " + path.string());

  const int ndim = h.dim[0];
  if (ndim < 1 || ndim > 7) throw IoError("invalid NIfTI dim[0] in " + path.string());
  auto dim_at = [&](int k) -> std::size_t {
    return k <= ndim ? static_cast<std::size_t>(std::max<std::int16_t>(h.dim[k], 1)) : 1;
  };
  RawImage img;
  img.shape = {dim_at(3), dim_at(2), dim_at(1)};
  img.channels = 1;
  for (int k = 4; k <= ndim; ++k) img.channels *= dim_at(k);
  img.spacing = {ndim >= 3 ? std::fabs(h.pixdim[3]) : 1.0, ndim >= 2 ? std::fabs(h.pixdim[2]) : 1.0,
                 std::fabs(h.pixdim[1])};
  if (!img.spacing.valid()) throw IoError("invalid pixdim in " + path.string());

  img.world.qform_code = h.qform_code;
  img.world.sform_code = h.sform_code;
  img.world.qfac = h.pixdim[0] < 0 ? -1.0f : 1.0f;
  img.world.quatern = {h.quatern_b, h.quatern_c, h.quatern_d};
  img.world.qoffset = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
  for (int k = 0; k < 4; ++k) {
    img.world.srow[0][k] = h.srow_x[k];
    img.world.srow[1][k] = h.srow_y[k];
    img.world.srow[2][k] = h.srow_z[k];
  }

  const DTypeInfo& dt = info_from_nifti(h.datatype);
  img.dtype = dt.type;
  const std::size_t n = img.shape.size() * img.channels;
  const std::size_t offset = static_cast<std::size_t>(h.vox_offset);
  if (offset < sizeof(Nifti1Header) || bytes.size() < offset + n * dt.bytes)
    throw IoError("truncated NIfTI data in " + path.string());
  decode(dt.type, reinterpret_cast<const unsigned char*>(bytes.data()) + offset, n, swap, img.values);

  const bool scaled = std::isfinite(h.scl_slope) && h.scl_slope != 0.0f &&
                      !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  if (scaled) {
    for (double& v : img.values) v = v * h.scl_slope + h.scl_inter;
    img.dtype = DType::F64;
  }
  return img;
}

void write_nifti(const RawImage& img, const fs::path& path, bool gz) {
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  const bool four_d = img.channels > 1;
  h.dim[0] = four_d ? 4 : 3;
  h.dim[1] = static_cast<std::int16_t>(img.shape.nx);
  h.dim[2] = static_cast<std::int16_t>(img.shape.ny);
  h.dim[3] = static_cast<std::int16_t>(img.shape.nz);
  h.dim[4] = static_cast<std::int16_t>(img.channels);
  for (int k = 5; k < 8; ++k) h.dim[k] = 1;
  if (img.shape.nx > 32767 || img.shape.ny > 32767 || img.shape.nz > 32767 || img.channels > 32767)
    throw IoError("dimension exceeds NIfTI-1 limit");
  const DTypeInfo& dt = info(img.dtype);
  h.datatype = dt.nifti_code;
  h.bitpix = static_cast<std::int16_t>(dt.bytes * 8);
  h.pixdim[0] = img.world.qfac;
  h.pixdim[1] = static_cast<float>(img.spacing.dx);
  h.pixdim[2] = static_cast<float>(img.spacing.dy);
  h.pixdim[3] = static_cast<float>(img.spacing.dz);
  for (int k = 4; k < 8; ++k) h.pixdim[k] = 1.0f;
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // millimetres
  h.qform_code = img.world.qform_code;
  h.sform_code = img.world.sform_code;
  h.quatern_b = img.world.quatern[0];
  h.quatern_c = img.world.quatern[1];
  h.quatern_d = img.world.quatern[2];
  h.qoffset_x = img.world.qoffset[0];
  h.qoffset_y = img.world.qoffset[1];
  h.qoffset_z = img.world.qoffset[2];
  for (int k = 0; k < 4; ++k) {
    h.srow_x[k] = img.world.srow[0][k];
    h.srow_y[k] = img.world.srow[1][k];
    h.srow_z[k] = img.world.srow[2][k];
  }
  std::memcpy(h.magic, "n+1", 4);

  std::string bytes(reinterpret_cast<const char*>(&h), sizeof(h));
  bytes.append(4, '\0');  // empty extension block
  encode(img.dtype, img.values, bytes);
  write_all(path, bytes, gz);
}

fs::path fixture_stem(const fs::path& path) {
  fs::path stem = path;
  stem.replace_extension();
  return stem;
}

RawImage read_fixture(const fs::path& path) {
  const fs::path stem = fixture_stem(path);
  fs::path json_path = stem;
  json_path += ".json";
  fs::path bin_path = stem;
  bin_path += ".bin";

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_all(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed fixture header " + json_path.string() + ": " + e.what());
  }
  RawImage img;
  try {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto spacing = j.at("spacing").get<std::vector<double>>();
    if (shape.size() != 3 || spacing.size() != 3)
      throw IoError("fixture shape and spacing need three entries");
    img.shape = {shape[0], shape[1], shape[2]};
    img.spacing = {spacing[0], spacing[1], spacing[2]};
    img.channels = j.value("channels", std::size_t{1});
    img.dtype = info_from_name(j.at("dtype").get<std::string>()).type;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed fixture header " + json_path.string() + ": " + e.what());
  }
  if (!img.spacing.valid()) throw IoError("invalid spacing in " + json_path.string());

  const std::string bytes = read_all(bin_path);
  const std::size_t n = img.shape.size() * img.channels;
  const DTypeInfo& dt = info(img.dtype);
  if (bytes.size() != n * dt.bytes)
    throw IoError("fixture data size mismatch in " + bin_path.string());
  decode(img.dtype, reinterpret_cast<const unsigned char*>(bytes.data()), n, false, img.values);
  return img;
}

void write_fixture(const RawImage& img, const fs::path& path) {
  const fs::path stem = fixture_stem(path);
  nlohmann::ordered_json j;
  j["shape"] = {img.shape.nz, img.shape.ny, img.shape.nx};
  j["spacing"] = {img.spacing.dz, img.spacing.dy, img.spacing.dx};
  j["dtype"] = info(img.dtype).name;
  j["channels"] = img.channels;
  fs::path json_path = stem;
  json_path += ".json";
  fs::path bin_path = stem;
  bin_path += ".bin";
  write_all(json_path, j.dump(2) + "\n", false);
  std::string bytes;
  encode(img.dtype, img.values, bytes);
  write_all(bin_path, bytes, false);
}

RawImage read_any(const fs::path& path) {
  if (!fs::exists(path) && format_of(path) != Format::Fixture)
    throw IoError("no such file: " + path.string());
  switch (format_of(path)) {
    case Format::Nifti:
    case Format::NiftiGz: return read_nifti(path);
    case Format::Fixture: return read_fixture(path);
  }
  throw IoError("unreachable");
}

void write_any(const RawImage& img, const fs::path& path) {
  switch (format_of(path)) {
    case Format::Nifti: return write_nifti(img, path, false);
    case Format::NiftiGz: return write_nifti(img, path, true);
    case Format::Fixture: return write_fixture(img, path);
  }
}

template <class T>
RawImage raw_from(const Grid<T>& g, DType dtype) {
  RawImage img;
  img.shape = g.shape();
  img.spacing = g.spacing();
  img.world = g.world();
  img.dtype = dtype;
  img.values.assign(g.data().begin(), g.data().end());
  return img;
}

void require_single_channel(const RawImage& img, const fs::path& path) {
  if (img.channels != 1)
    throw ValidationError("expected a 3D image, got " + std::to_string(img.channels) +
                          " channels in " + path.string());
}

}  // namespace

Volume load_volume(const fs::path& path) {
  RawImage img = read_any(path);
  require_single_channel(img, path);
  std::vector<float> data(img.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(img.values[i]))
      throw ValidationError("non-finite intensity in " + path.string());
    data[i] = static_cast<float>(img.values[i]);
  }
  Volume v(img.shape, img.spacing, std::move(data));
  v.set_world(img.world);
  return v;
}

LabelVolume load_labels(const fs::path& path, const ClassMap& map) {
  RawImage img = read_any(path);
  require_single_channel(img, path);
  std::vector<LabelId> data(img.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = img.values[i];
    if (!std::isfinite(v) || v != std::floor(v))
      throw ValidationError("non-integer label value in " + path.string());
    if (v < 0 || v > 65535 || !map.is_valid_label(static_cast<LabelId>(v)))
      throw ValidationError("invalid class id " + std::to_string(static_cast<long long>(v)) +
                            " in " + path.string());
    data[i] = static_cast<LabelId>(v);
  }
  LabelVolume v(img.shape, img.spacing, std::move(data));
  v.set_world(img.world);
  return v;
}

Mask load_mask(const fs::path& path) {
  RawImage img = read_any(path);
  require_single_channel(img, path);
  std::vector<std::uint8_t> data(img.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = img.values[i] != 0.0 ? 1 : 0;
  Mask m(img.shape, img.spacing, std::move(data));
  m.set_world(img.world);
  return m;
}

ProbVolume load_probabilities(const fs::path& path) {
  RawImage img = read_any(path);
  if (img.channels != kNumChannels)
    throw ValidationError("probability image needs " + std::to_string(kNumChannels) +
                          " channels, got " + std::to_string(img.channels));
  ProbVolume p(img.shape, img.spacing);
  const std::size_t n = img.shape.size();
  for (std::size_t k = 0; k < kNumChannels; ++k) {
    p.channels[k].set_world(img.world);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = img.values[k * n + i];
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("probability outside [0,1] in " + path.string());
      p.channels[k][i] = v;
    }
  }
  return p;
}

void save_volume(const Volume& v, const fs::path& path) { write_any(raw_from(v, DType::F32), path); }

void save_labels(const LabelVolume& v, const fs::path& path) {
  write_any(raw_from(v, DType::U16), path);
}

void save_mask(const Mask& m, const fs::path& path) { write_any(raw_from(m, DType::U8), path); }

void save_grid(const Grid<double>& g, const fs::path& path) {
  write_any(raw_from(g, DType::F64), path);
}

void save_probabilities(const ProbVolume& p, const fs::path& path) {
  p.validate();
  RawImage img = raw_from(p.channels[0], DType::F64);
  img.channels = kNumChannels;
  img.values.clear();
  img.values.reserve(p.shape().size() * kNumChannels);
  for (const auto& ch : p.channels) img.values.insert(img.values.end(), ch.data().begin(), ch.data().end());
  write_any(img, path);
}

}  // namespace cowtopo
