#pragma once

// HTF binary tensor container and the dataset directory layout.
//
//   offset 0  "HOTB"
//          4  version   u8 = 1
//          5  dtype     u8 (0 = u8, 1 = f32 little-endian)
//          6  rank      u8 (1..4)
//          7  reserved  u8 = 0
//          8  dims      rank x u32 little-endian
//             payload   row-major, last dimension fastest
//
// Dataset files: <dir>/<image_id>.{gt,pred,depth,masks,sim}.htf

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hotkit/grid.hpp"
#include "hotkit/regions.hpp"

namespace hotkit {

enum class Dtype : std::uint8_t { U8 = 0, F32 = 1 };

class Tensor {
 public:
  Tensor(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values);
  Tensor(std::vector<std::uint32_t> dims, std::vector<float> values);

  Dtype dtype() const noexcept { return std::holds_alternative<std::vector<std::uint8_t>>(values_) ? Dtype::U8 : Dtype::F32; }
  const std::vector<std::uint32_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t element_count() const;

  const std::vector<std::uint8_t>& u8() const;
  const std::vector<float>& f32() const;

  /// Bitwise equality (NaN payloads included).
  bool identical(const Tensor& other) const;

 private:
  std::vector<std::uint32_t> dims_;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> values_;
};

std::vector<std::uint8_t> encode_htf(const Tensor& tensor);
/// `source` names the input in diagnostics.
Tensor decode_htf(std::span<const std::uint8_t> bytes, std::string_view source = "<memory>");

void write_htf(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_htf(const std::filesystem::path& path);

// Conversions between tensors and domain types. Reads validate invariants.
Tensor to_tensor(const LabelMap& labels);
Tensor to_tensor(const ProbMap& probs);
Tensor to_tensor(const DepthMap& depth);
Tensor to_tensor(const PersonMaskSet& masks);
Tensor to_tensor(const SimilarityVector& s);
Tensor to_tensor(const ScalarField& field);
Tensor to_tensor(const BinaryGrid& mask);
Tensor to_tensor(const ComponentMap& components);

LabelMap label_map_from(const Tensor& t, std::string_view source);
ProbMap prob_map_from(const Tensor& t, std::string_view source);
DepthMap depth_map_from(const Tensor& t, std::string_view source);
PersonMaskSet person_masks_from(const Tensor& t, std::string_view source);
SimilarityVector similarity_from(const Tensor& t, std::string_view source);
ScalarField scalar_field_from(const Tensor& t, std::string_view source);

enum class PredResolution { Full, Quarter };

struct DatasetEntry {
  std::string image_id;
  LabelMap gt;
  std::optional<std::variant<ProbMap, LabelMap>> pred;
  std::optional<PredResolution> pred_resolution;
  std::optional<DepthMap> depth;
  std::optional<PersonMaskSet> masks;
  std::optional<SimilarityVector> sim;
};

/// Which files a command needs; the gt file is always required. Optional
/// files are loaded when present.
struct DatasetRequirements {
  bool pred = false;
  bool depth = false;
  bool masks = false;
  bool sim = false;
};

std::filesystem::path dataset_file(const std::filesystem::path& dir, std::string_view image_id,
                                   std::string_view kind);

/// Image ids with a <id>.gt.htf file, sorted.
std::vector<std::string> list_image_ids(const std::filesystem::path& dir);

DatasetEntry load_dataset_entry(const std::filesystem::path& dir, std::string_view image_id,
                                const DatasetRequirements& required = {});

void write_dataset_entry(const std::filesystem::path& dir, const DatasetEntry& entry);

}  // namespace hotkit
