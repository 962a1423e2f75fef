/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include "impactreg/io/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "impactreg/io/text_format.hpp"

namespace impactreg {

namespace {

bool ends_with_nocase(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(
        s[s.size() - suffix.size() + i])));
    if (a != suffix[i]) return false;
  }
  return true;
}

std::string directory_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash + 1);
}

std::string read_whole_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return std::move(ss).str();
}

void write_whole_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

void reject_gzip(const std::string& bytes, const std::string& path) {
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
      static_cast<unsigned char>(bytes[1]) == 0x8b)
    throw IoError("'" + path + "': gzip-compressed data is unsupported (CompressedData)");
}

std::size_t dtype_size(StoredDtype t) {
  switch (t) {
    case StoredDtype::kFloat32: return 4;
    case StoredDtype::kInt16: return 2;
    case StoredDtype::kUint8: return 1;
  }
  return 0;
}

/** Decodes `count` little-endian elements of `dtype` into floats. */
void decode_elements(const char* bytes, std::size_t count, StoredDtype dtype, float* out) {
  switch (dtype) {
    case StoredDtype::kFloat32:
      std::memcpy(out, bytes, count * sizeof(float));
      break;
    case StoredDtype::kInt16: {
      for (std::size_t i = 0; i < count; ++i) {
        std::int16_t v;
        std::memcpy(&v, bytes + 2 * i, 2);
        out[i] = static_cast<float>(v);
      }
      break;
    }
    case StoredDtype::kUint8: {
      for (std::size_t i = 0; i < count; ++i)
        out[i] = static_cast<float>(static_cast<unsigned char>(bytes[i]));
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// MetaImage (.mha / .mhd)
// ---------------------------------------------------------------------------

struct MetaHeader {
  std::map<std::string, std::string> fields;  // all "Key = value" pairs
  std::string data_file;                      // ElementDataFile value
  std::size_t local_data_offset = 0;          // byte offset after the header (LOCAL)
};

/**
 * Parses "Key = value" lines up to and including ElementDataFile, which by
 * the format's contract is the last header line; for LOCAL files the raw
 * data starts right after its newline.
 */
MetaHeader parse_meta_header(const std::string& bytes, const std::string& path) {
  MetaHeader h;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) eol = bytes.size();
    std::string line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol < bytes.size() ? eol + 1 : eol;

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;  // blank line
      throw IoError("'" + path + "': malformed MetaImage header line '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const std::size_t b = s.find_first_not_of(" \t");
      const std::size_t e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    h.fields[key] = value;
    if (key == "ElementDataFile") {
      h.data_file = value;
      h.local_data_offset = pos;
      return h;
    }
  }
  throw IoError("'" + path + "': MetaImage header has no ElementDataFile entry");
}

std::vector<double> parse_numbers(const std::string& s, const std::string& path,
                                  const std::string& key) {
  std::istringstream ss(s);
  std::vector<double> out;
  double v;
  while (ss >> v) out.push_back(v);
  std::string rest;
  if (ss >> rest)
    throw IoError("'" + path + "': MetaImage field " + key + " has non-numeric value '" + s +
                  "'");
  return out;
}

VolumeFile read_meta(const std::string& path) {
  const std::string bytes = read_whole_file(path);
  reject_gzip(bytes, path);
  const MetaHeader h = parse_meta_header(bytes, path);

  auto field = [&](const char* key) -> const std::string* {
    auto it = h.fields.find(key);
    return it == h.fields.end() ? nullptr : &it->second;
  };
  auto is_true = [](const std::string& v) { return v == "True" || v == "true" || v == "1"; };

  if (const std::string* v = field("ObjectType"); v && *v != "Image")
    throw IoError("'" + path + "': unsupported ObjectType '" + *v + "' (only Image)");
  if (const std::string* v = field("NDims"); v && *v != "3")
    throw IoError("'" + path + "': unsupported NDims " + *v + " (only 3)");
  if (const std::string* v = field("CompressedData"); v && is_true(*v))
    throw IoError("'" + path + "': CompressedData = True is unsupported");
  if (const std::string* v = field("BinaryData"); v && !is_true(*v))
    throw IoError("'" + path + "': BinaryData = False (ASCII data) is unsupported");
  for (const char* key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"})
    if (const std::string* v = field(key); v && is_true(*v))
      throw IoError("'" + path + "': " + key + " = True (big endian) is unsupported");
  if (const std::string* v = field("TransformMatrix")) {
    const std::vector<double> m = parse_numbers(*v, path, "TransformMatrix");
    static const double kIdentity[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    bool identity = m.size() == 9;
    for (std::size_t i = 0; identity && i < 9; ++i)
      identity = std::abs(m[i] - kIdentity[i]) <= 1e-9;
    if (!identity)
      throw IoError("'" + path +
                    "': non-identity TransformMatrix (rotated axes) is unsupported");
  }

  const std::string* dim = field("DimSize");
  if (!dim) throw IoError("'" + path + "': MetaImage header is missing DimSize");
  const std::vector<double> dims = parse_numbers(*dim, path, "DimSize");
  if (dims.size() != 3 || dims[0] < 1 || dims[1] < 1 || dims[2] < 1)
    throw IoError("'" + path + "': DimSize must be three positive integers");

  Vec3 spacing{1, 1, 1};
  if (const std::string* v = field("ElementSpacing")) {
    const std::vector<double> s = parse_numbers(*v, path, "ElementSpacing");
    if (s.size() != 3 || s[0] <= 0 || s[1] <= 0 || s[2] <= 0)
      throw IoError("'" + path + "': ElementSpacing must be three positive numbers");
    spacing = {s[0], s[1], s[2]};
  }
  Vec3 origin{0, 0, 0};
  if (const std::string* v = field("Offset")) {
    const std::vector<double> o = parse_numbers(*v, path, "Offset");
    if (o.size() != 3) throw IoError("'" + path + "': Offset must be three numbers");
    origin = {o[0], o[1], o[2]};
  }
  int channels = 1;
  if (const std::string* v = field("ElementNumberOfChannels")) {
    const std::vector<double> c = parse_numbers(*v, path, "ElementNumberOfChannels");
    if (c.size() != 1 || c[0] < 1)
      throw IoError("'" + path + "': ElementNumberOfChannels must be a positive integer");
    channels = static_cast<int>(c[0]);
  }

  const std::string* et = field("ElementType");
  if (!et) throw IoError("'" + path + "': MetaImage header is missing ElementType");
  StoredDtype dtype;
  if (*et == "MET_FLOAT")
    dtype = StoredDtype::kFloat32;
  else if (*et == "MET_SHORT")
    dtype = StoredDtype::kInt16;
  else if (*et == "MET_UCHAR")
    dtype = StoredDtype::kUint8;
  else
    throw IoError("'" + path + "': unsupported ElementType '" + *et +
                  "' (use MET_FLOAT, MET_SHORT, or MET_UCHAR)");

  std::string raw;          // owns sibling-file bytes when not LOCAL
  const char* data = nullptr;
  std::size_t available = 0;
  if (h.data_file == "LOCAL") {
    data = bytes.data() + h.local_data_offset;
    available = bytes.size() - h.local_data_offset;
  } else if (h.data_file == "LIST" || h.data_file.find('%') != std::string::npos) {
    throw IoError("'" + path + "': multi-file ElementDataFile ('" + h.data_file +
                  "') is unsupported");
  } else {
    raw = read_whole_file(directory_of(path) + h.data_file);
    reject_gzip(raw, h.data_file);
    data = raw.data();
    available = raw.size();
  }

  const Index3 d{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2])};
  VolumeFile out;
  out.stored = dtype;
  out.volume = Volume(d, spacing, origin, channels);
  const std::size_t count = out.volume.value_count();
  if (available < count * dtype_size(dtype))
    throw IoError("'" + path + "': voxel data is truncated (" + std::to_string(available) +
                  " bytes for " + std::to_string(count * dtype_size(dtype)) + " expected)");
  decode_elements(data, count, dtype, out.volume.data().data());
  return out;
}

std::string meta_header_text(const Index3& dims, const Vec3& spacing, const Vec3& origin,
                             int channels, const char* element_type,
                             const std::string& data_file) {
  std::string h;
  h += "ObjectType = Image\n";
  h += "NDims = 3\n";
  h += "BinaryData = True\n";
  h += "BinaryDataByteOrderMSB = False\n";
  h += "CompressedData = False\n";
  h += "TransformMatrix = 1 0 0 0 1 0 0 0 1\n";
  h += "Offset = " + format_g17(origin.x) + " " + format_g17(origin.y) + " " +
       format_g17(origin.z) + "\n";
  h += "CenterOfRotation = 0 0 0\n";
  h += "ElementSpacing = " + format_g17(spacing.x) + " " + format_g17(spacing.y) + " " +
       format_g17(spacing.z) + "\n";
  h += "DimSize = " + std::to_string(dims.x) + " " + std::to_string(dims.y) + " " +
       std::to_string(dims.z) + "\n";
  if (channels != 1) h += "ElementNumberOfChannels = " + std::to_string(channels) + "\n";
  h += "ElementType = ";
  h += element_type;
  h += "\n";
  h += "ElementDataFile = " + data_file + "\n";
  return h;
}

std::string filename_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

void write_meta(const std::string& path, const Index3& dims, const Vec3& spacing,
                const Vec3& origin, int channels, const char* element_type,
                const char* data, std::size_t size) {
  if (ends_with_nocase(path, ".mha")) {
    std::string bytes = meta_header_text(dims, spacing, origin, channels, element_type, "LOCAL");
    bytes.append(data, size);
    write_whole_file(path, bytes);
  } else {
    std::string raw_name = filename_of(path);
    raw_name.replace(raw_name.size() - 4, 4, ".raw");
    write_whole_file(path, meta_header_text(dims, spacing, origin, channels, element_type,
                                            raw_name));
    write_whole_file(directory_of(path) + raw_name, std::string(data, data + size));
  }
}

// ---------------------------------------------------------------------------
// NIfTI-1 (.nii, single file, uncompressed)
// ---------------------------------------------------------------------------

struct NiftiHeader {          // 348-byte on-disk layout (all fields aligned)
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
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kIntentVector = 1007;

VolumeFile read_nifti(const std::string& path) {
  const std::string bytes = read_whole_file(path);
  reject_gzip(bytes, path);
  if (bytes.size() < sizeof(NiftiHeader))
    throw IoError("'" + path + "': file is smaller than a NIfTI-1 header");
  NiftiHeader h;
  std::memcpy(&h, bytes.data(), sizeof(h));

  if (h.sizeof_hdr != 348) {
    std::int32_t swapped;
    const char* p = reinterpret_cast<const char*>(&h.sizeof_hdr);
    char q[4] = {p[3], p[2], p[1], p[0]};
    std::memcpy(&swapped, q, 4);
    if (swapped == 348)
      throw IoError("'" + path + "': big-endian NIfTI (sizeof_hdr byte order) is unsupported");
    throw IoError("'" + path + "': not a NIfTI-1 file (sizeof_hdr = " +
                  std::to_string(h.sizeof_hdr) + ")");
  }
  if (std::memcmp(h.magic, "n+1", 4) != 0) {
    if (std::memcmp(h.magic, "ni1", 4) == 0)
      throw IoError("'" + path + "': two-file NIfTI (magic ni1) is unsupported");
    throw IoError("'" + path + "': bad NIfTI magic");
  }

  if (h.dim[0] < 3 || h.dim[0] > 5)
    throw IoError("'" + path + "': unsupported dim[0] = " + std::to_string(h.dim[0]) +
                  " (3-D volumes only)");
  if (h.dim[1] < 1 || h.dim[2] < 1 || h.dim[3] < 1)
    throw IoError("'" + path + "': non-positive spatial dimension in dim[1..3]");
  if (h.dim[0] >= 4 && h.dim[4] > 1)
    throw IoError("'" + path + "': dim[4] = " + std::to_string(h.dim[4]) +
                  " time points is unsupported");
  const int channels = h.dim[0] == 5 ? std::max<int>(1, h.dim[5]) : 1;

  StoredDtype dtype;
  if (h.datatype == kDtFloat32)
    dtype = StoredDtype::kFloat32;
  else if (h.datatype == kDtInt16)
    dtype = StoredDtype::kInt16;
  else if (h.datatype == kDtUint8)
    dtype = StoredDtype::kUint8;
  else
    throw IoError("'" + path + "': unsupported NIfTI datatype code " +
                  std::to_string(h.datatype) + " (use 2, 4, or 16)");

  Vec3 spacing{h.pixdim[1] > 0 ? h.pixdim[1] : 1.0, h.pixdim[2] > 0 ? h.pixdim[2] : 1.0,
               h.pixdim[3] > 0 ? h.pixdim[3] : 1.0};
  Vec3 origin{0, 0, 0};
  const double tol = 1e-6;
  if (h.sform_code > 0) {
    const float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        const double v = rows[r][c];
        if (r == c ? v <= 0.0 : std::abs(v) > tol)
          throw IoError("'" + path +
                        "': oblique or flipped sform (srow matrix) is unsupported; only "
                        "axis-aligned positive-diagonal geometry is accepted");
      }
    spacing = {rows[0][0], rows[1][1], rows[2][2]};
    origin = {rows[0][3], rows[1][3], rows[2][3]};
  } else if (h.qform_code > 0) {
    if (std::abs(h.quatern_b) > tol || std::abs(h.quatern_c) > tol ||
        std::abs(h.quatern_d) > tol)
      throw IoError("'" + path +
                    "': rotated qform (quatern_b/c/d) is unsupported; only axis-aligned "
                    "geometry is accepted");
    if (h.pixdim[0] < 0)
      throw IoError("'" + path + "': negative qfac (pixdim[0], flipped z) is unsupported");
    origin = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
  }

  const std::size_t offset = h.vox_offset < 352.0f ? 352 : static_cast<std::size_t>(h.vox_offset);
  const Index3 d{h.dim[1], h.dim[2], h.dim[3]};
  VolumeFile out;
  out.stored = dtype;
  out.volume = Volume(d, spacing, origin, channels);
  const std::size_t count = out.volume.value_count();
  if (bytes.size() < offset || bytes.size() - offset < count * dtype_size(dtype))
    throw IoError("'" + path + "': voxel data is truncated");

  if (channels == 1) {
    decode_elements(bytes.data() + offset, count, dtype, out.volume.data().data());
  } else {
    // On disk channels are planar (the 5th dimension varies slowest);
    // interleave into the in-memory layout.
    const std::size_t voxels = out.volume.voxel_count();
    std::vector<float> plane(voxels);
    for (int c = 0; c < channels; ++c) {
      decode_elements(bytes.data() + offset + c * voxels * dtype_size(dtype), voxels, dtype,
                      plane.data());
      float* dst = out.volume.data().data();
      for (std::size_t i = 0; i < voxels; ++i) dst[i * channels + c] = plane[i];
    }
  }

  // Apply the affine intensity scaling when present (slope 0 means unset).
  if (h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f)) {
    for (float& v : out.volume.data()) v = v * h.scl_slope + h.scl_inter;
  }
  return out;
}

void write_nifti(const std::string& path, const Index3& dims, const Vec3& spacing,
                 const Vec3& origin, int channels, std::int16_t datatype, const char* data,
                 std::size_t size) {
  NiftiHeader h;
  std::memset(&h, 0, sizeof(h));
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = channels == 1 ? 3 : 5;
  h.dim[1] = static_cast<std::int16_t>(dims.x);
  h.dim[2] = static_cast<std::int16_t>(dims.y);
  h.dim[3] = static_cast<std::int16_t>(dims.z);
  h.dim[4] = 1;
  h.dim[5] = static_cast<std::int16_t>(channels == 1 ? 1 : channels);
  h.dim[6] = 1;
  h.dim[7] = 1;
  if (channels != 1) h.intent_code = kIntentVector;
  h.datatype = datatype;
  h.bitpix = datatype == kDtFloat32 ? 32 : (datatype == kDtInt16 ? 16 : 8);
  h.pixdim[0] = 1.0f;
  h.pixdim[1] = static_cast<float>(spacing.x);
  h.pixdim[2] = static_cast<float>(spacing.y);
  h.pixdim[3] = static_cast<float>(spacing.z);
  h.pixdim[4] = h.pixdim[5] = h.pixdim[6] = h.pixdim[7] = 1.0f;
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.xyzt_units = 2 | 8;  // millimetres, seconds
  h.qform_code = 1;      // identity rotation, offset = origin
  h.sform_code = 1;
  h.qoffset_x = static_cast<float>(origin.x);
  h.qoffset_y = static_cast<float>(origin.y);
  h.qoffset_z = static_cast<float>(origin.z);
  h.srow_x[0] = h.pixdim[1];
  h.srow_x[3] = h.qoffset_x;
  h.srow_y[1] = h.pixdim[2];
  h.srow_y[3] = h.qoffset_y;
  h.srow_z[2] = h.pixdim[3];
  h.srow_z[3] = h.qoffset_z;
  std::memcpy(h.magic, "n+1", 4);

  std::string bytes(reinterpret_cast<const char*>(&h), sizeof(h));
  bytes.append(4, '\0');  // no header extensions
  bytes.append(data, size);
  write_whole_file(path, bytes);
}

enum class Format { kMeta, kNifti };

Format format_of(const std::string& path) {
  if (ends_with_nocase(path, ".mha") || ends_with_nocase(path, ".mhd")) return Format::kMeta;
  if (ends_with_nocase(path, ".nii")) return Format::kNifti;
  if (ends_with_nocase(path, ".gz"))
    throw IoError("'" + path + "': compressed volumes (.gz) are unsupported");
  throw IoError("'" + path + "': unknown volume extension (use .mha, .mhd, or .nii)");
}

/** Channel-planar copy of a volume's values, as NIfTI stores them. */
std::vector<float> planar_values(const Volume& v) {
  const int nc = v.channels();
  const std::size_t voxels = v.voxel_count();
  std::vector<float> out(v.value_count());
  const float* src = v.data().data();
  for (std::size_t i = 0; i < voxels; ++i)
    for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(c) * voxels + i] = src[i * nc + c];
  return out;
}

}  // namespace

std::string dtype_name(StoredDtype dtype) {
  switch (dtype) {
    case StoredDtype::kFloat32: return "float32";
    case StoredDtype::kInt16: return "int16";
    case StoredDtype::kUint8: return "uint8";
  }
  return "unknown";
}

VolumeFile read_volume_file(const std::string& path) {
  return format_of(path) == Format::kMeta ? read_meta(path) : read_nifti(path);
}

Volume read_volume(const std::string& path) { return read_volume_file(path).volume; }

void write_volume(const Volume& volume, const std::string& path) {
  if (volume.voxel_count() == 0) throw IoError("write_volume: the volume is empty");
  const char* data = reinterpret_cast<const char*>(volume.data().data());
  const std::size_t size = volume.value_count() * sizeof(float);
  if (format_of(path) == Format::kMeta) {
    write_meta(path, volume.dims(), volume.spacing(), volume.origin(), volume.channels(),
               "MET_FLOAT", data, size);
  } else if (volume.channels() == 1) {
    write_nifti(path, volume.dims(), volume.spacing(), volume.origin(), 1, kDtFloat32, data,
                size);
  } else {
    const std::vector<float> planar = planar_values(volume);
    write_nifti(path, volume.dims(), volume.spacing(), volume.origin(), volume.channels(),
                kDtFloat32, reinterpret_cast<const char*>(planar.data()), size);
  }
}

Mask read_mask(const std::string& path) {
  const VolumeFile f = read_volume_file(path);
  if (f.volume.channels() != 1)
    throw IoError("'" + path + "': masks must be single-channel (got " +
                  std::to_string(f.volume.channels()) + " channels)");
  Mask m(f.volume.dims(), f.volume.spacing(), f.volume.origin());
  const std::span<const float> src = f.volume.data();
  for (std::size_t i = 0; i < src.size(); ++i) m.data()[i] = src[i] != 0.0f ? 1 : 0;
  return m;
}

void write_mask(const Mask& mask, const std::string& path) {
  if (mask.voxel_count() == 0) throw IoError("write_mask: the mask is empty");
  const char* data = reinterpret_cast<const char*>(mask.data().data());
  const std::size_t size = mask.voxel_count();
  if (format_of(path) == Format::kMeta) {
    write_meta(path, mask.dims(), mask.spacing(), mask.origin(), 1, "MET_UCHAR", data, size);
  } else {
    write_nifti(path, mask.dims(), mask.spacing(), mask.origin(), 1, kDtUint8, data, size);
  }
}

}  // namespace impactreg
