#include "hotkit/tensorio.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace hotkit {

namespace {

constexpr std::uint8_t kMagic[4] = {'H', 'O', 'T', 'B'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kFixedHeader = 8;

std::size_t dtype_size(Dtype d) { return d == Dtype::U8 ? 1 : 4; }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

std::string shape_string(const std::vector<std::uint32_t>& dims) {
  return fmt::format("{}", fmt::join(dims, "x"));
}

[[noreturn]] void shape_error(std::string_view source, std::string_view expected,
                              const Tensor& t) {
  fail(ErrorKind::ShapeMismatch,
       fmt::format("{}: expected {}, found {} tensor of shape {}", source, expected,
                   t.dtype() == Dtype::U8 ? "u8" : "f32", shape_string(t.dims())));
}

// Re-throws a domain-type validation failure with the file name attached.
template <typename F>
auto with_source(std::string_view source, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    const ErrorKind kind =
        e.kind() == ErrorKind::DimensionMismatch ? ErrorKind::ShapeMismatch : ErrorKind::InvariantViolation;
    fail(kind, fmt::format("{}: {}", source, e.what()));
  }
}

std::vector<std::uint32_t> dims_of(std::initializer_list<std::size_t> dims) {
  std::vector<std::uint32_t> out;
  for (std::size_t d : dims) {
    if (d > std::numeric_limits<std::uint32_t>::max())
      fail(ErrorKind::DimOverflow, fmt::format("dimension {} does not fit in 32 bits", d));
    out.push_back(static_cast<std::uint32_t>(d));
  }
  return out;
}

std::vector<float> to_f32(std::span<const double> values) {
  std::vector<float> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [](double v) { return static_cast<float>(v); });
  return out;
}

std::vector<double> to_f64(const std::vector<float>& values) {
  return std::vector<double>(values.begin(), values.end());
}

}  // namespace

Tensor::Tensor(std::vector<std::uint32_t> dims, std::vector<std::uint8_t> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (dims_.empty() || dims_.size() > 4)
    fail(ErrorKind::BadHeader, fmt::format("rank {} outside 1..4", dims_.size()));
  if (u8().size() != element_count())
    fail(ErrorKind::DimensionMismatch, "tensor payload does not match its dimensions");
}

Tensor::Tensor(std::vector<std::uint32_t> dims, std::vector<float> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (dims_.empty() || dims_.size() > 4)
    fail(ErrorKind::BadHeader, fmt::format("rank {} outside 1..4", dims_.size()));
  if (f32().size() != element_count())
    fail(ErrorKind::DimensionMismatch, "tensor payload does not match its dimensions");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims_) n *= d;
  return n;
}

const std::vector<std::uint8_t>& Tensor::u8() const {
  if (dtype() != Dtype::U8) fail(ErrorKind::BadDtype, "tensor is not u8");
  return std::get<std::vector<std::uint8_t>>(values_);
}

const std::vector<float>& Tensor::f32() const {
  if (dtype() != Dtype::F32) fail(ErrorKind::BadDtype, "tensor is not f32");
  return std::get<std::vector<float>>(values_);
}

bool Tensor::identical(const Tensor& other) const {
  if (dtype() != other.dtype() || dims_ != other.dims_) return false;
  if (dtype() == Dtype::U8) return u8() == other.u8();
  const auto& a = f32();
  const auto& b = other.f32();
  return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_htf(const Tensor& tensor) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype()));
  out.push_back(static_cast<std::uint8_t>(tensor.rank()));
  out.push_back(0);
  for (std::uint32_t d : tensor.dims()) put_u32(out, d);
  if (tensor.dtype() == Dtype::U8) {
    out.insert(out.end(), tensor.u8().begin(), tensor.u8().end());
  } else {
    out.reserve(out.size() + 4 * tensor.element_count());
    for (float v : tensor.f32()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor decode_htf(std::span<const std::uint8_t> bytes, std::string_view source) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    fail(ErrorKind::BadMagic, fmt::format("{}: offset 0: missing \"HOTB\" magic", source));
  if (bytes.size() < kFixedHeader)
    fail(ErrorKind::TruncatedPayload,
         fmt::format("{}: header needs {} bytes, file has {}", source, kFixedHeader, bytes.size()));
  if (bytes[4] != kVersion)
    fail(ErrorKind::BadVersion,
         fmt::format("{}: offset 4: version {} (expected 1)", source, int(bytes[4])));
  if (bytes[5] > 1)
    fail(ErrorKind::BadDtype, fmt::format("{}: offset 5: unknown dtype {}", source, int(bytes[5])));
  const auto dtype = static_cast<Dtype>(bytes[5]);
  const std::size_t rank = bytes[6];
  if (rank < 1 || rank > 4)
    fail(ErrorKind::BadHeader, fmt::format("{}: offset 6: rank {} outside 1..4", source, rank));
  if (bytes[7] != 0)
    fail(ErrorKind::BadHeader,
         fmt::format("{}: offset 7: reserved byte is {} (expected 0)", source, int(bytes[7])));
  const std::size_t header = kFixedHeader + 4 * rank;
  if (bytes.size() < header)
    fail(ErrorKind::TruncatedPayload,
         fmt::format("{}: dims need {} header bytes, file has {}", source, header, bytes.size()));

  std::vector<std::uint32_t> dims(rank);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(bytes.data() + kFixedHeader + 4 * i);
    if (dims[i] != 0 && count > std::numeric_limits<std::uint64_t>::max() / 4 / dims[i])
      fail(ErrorKind::DimOverflow,
           fmt::format("{}: offset {}: dimensions overflow the payload size", source,
                       kFixedHeader + 4 * i));
    count *= dims[i];
  }
  const std::uint64_t payload = count * dtype_size(dtype);
  const std::uint64_t available = bytes.size() - header;
  if (available < payload)
    fail(ErrorKind::TruncatedPayload,
         fmt::format("{}: payload at offset {} needs {} bytes, found {}", source, header, payload,
                     available));
  if (available > payload)
    fail(ErrorKind::TrailingBytes,
         fmt::format("{}: {} unexpected bytes after payload ending at offset {}", source,
                     available - payload, header + payload));

  const std::uint8_t* p = bytes.data() + header;
  if (dtype == Dtype::U8) return Tensor(std::move(dims), std::vector<std::uint8_t>(p, p + count));
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return Tensor(std::move(dims), std::move(values));
}

void write_htf(const Tensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_htf(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::IoError, fmt::format("failed writing {}", path.string()));
}

Tensor read_htf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_htf(bytes, path.string());
}

Tensor to_tensor(const LabelMap& labels) {
  return Tensor(dims_of({labels.height(), labels.width()}), labels.grid().vec());
}

Tensor to_tensor(const ProbMap& probs) {
  return Tensor(dims_of({kNumClasses, probs.height(), probs.width()}), to_f32(probs.data()));
}

Tensor to_tensor(const DepthMap& depth) {
  return Tensor(dims_of({depth.height(), depth.width()}), to_f32(depth.data()));
}

Tensor to_tensor(const PersonMaskSet& masks) {
  return Tensor(dims_of({masks.count(), masks.height(), masks.width()}),
                std::vector<std::uint8_t>(masks.data().begin(), masks.data().end()));
}

Tensor to_tensor(const SimilarityVector& s) {
  return Tensor(dims_of({kNumContactClasses}), to_f32(s.values()));
}

Tensor to_tensor(const ScalarField& field) {
  return Tensor(dims_of({field.height(), field.width()}), to_f32(field.data()));
}

Tensor to_tensor(const BinaryGrid& mask) {
  return Tensor(dims_of({mask.height(), mask.width()}), mask.vec());
}

Tensor to_tensor(const ComponentMap& components) {
  std::vector<float> values(components.labels().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(components[i]);
  return Tensor(dims_of({components.height(), components.width()}), std::move(values));
}

LabelMap label_map_from(const Tensor& t, std::string_view source) {
  if (t.dtype() != Dtype::U8 || t.rank() != 2) shape_error(source, "u8 HxW label map", t);
  return with_source(source, [&] { return LabelMap(t.dims()[0], t.dims()[1], t.u8()); });
}

ProbMap prob_map_from(const Tensor& t, std::string_view source) {
  if (t.dtype() != Dtype::F32 || t.rank() != 3 || t.dims()[0] != kNumClasses)
    shape_error(source, "f32 18xHxW probability map", t);
  return with_source(source, [&] { return ProbMap(t.dims()[1], t.dims()[2], to_f64(t.f32())); });
}

DepthMap depth_map_from(const Tensor& t, std::string_view source) {
  if (t.dtype() != Dtype::F32 || t.rank() != 2) shape_error(source, "f32 HxW depth map", t);
  return with_source(source, [&] {
    return DepthMap::raw(ScalarField(t.dims()[0], t.dims()[1], to_f64(t.f32())));
  });
}

PersonMaskSet person_masks_from(const Tensor& t, std::string_view source) {
  if (t.dtype() != Dtype::U8 || t.rank() != 3) shape_error(source, "u8 NxHxW person masks", t);
  return with_source(source,
                     [&] { return PersonMaskSet(t.dims()[0], t.dims()[1], t.dims()[2], t.u8()); });
}

SimilarityVector similarity_from(const Tensor& t, std::string_view source) {
  if (t.dtype() != Dtype::F32 || t.rank() != 1 || t.dims()[0] != kNumContactClasses)
    shape_error(source, "f32 vector of 17 similarities", t);
  std::array<double, kNumContactClasses> s{};
  std::copy(t.f32().begin(), t.f32().end(), s.begin());
  return with_source(source, [&] { return SimilarityVector(s); });
}

ScalarField scalar_field_from(const Tensor& t, std::string_view source) {
  if (t.rank() != 2) shape_error(source, "HxW field", t);
  if (t.dtype() == Dtype::F32) return ScalarField(t.dims()[0], t.dims()[1], to_f64(t.f32()));
  std::vector<double> values(t.u8().begin(), t.u8().end());
  return ScalarField(t.dims()[0], t.dims()[1], std::move(values));
}

std::filesystem::path dataset_file(const std::filesystem::path& dir, std::string_view image_id,
                                   std::string_view kind) {
  return dir / fmt::format("{}.{}.htf", image_id, kind);
}

std::vector<std::string> list_image_ids(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    fail(ErrorKind::MissingFile, fmt::format("dataset directory {} does not exist", dir.string()));
  constexpr std::string_view suffix = ".gt.htf";
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix))
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

DatasetEntry load_dataset_entry(const std::filesystem::path& dir, std::string_view image_id,
                                const DatasetRequirements& required) {
  auto load = [&](std::string_view kind, bool needed) -> std::optional<Tensor> {
    const auto path = dataset_file(dir, image_id, kind);
    if (!std::filesystem::exists(path)) {
      if (needed) fail(ErrorKind::MissingFile, fmt::format("missing file {}", path.string()));
      return std::nullopt;
    }
    return read_htf(path);
  };
  auto source = [&](std::string_view kind) { return dataset_file(dir, image_id, kind).string(); };

  const Tensor gt_t = *load("gt", true);
  DatasetEntry entry{std::string(image_id), label_map_from(gt_t, source("gt")), {}, {}, {}, {}, {}};
  const std::size_t h = entry.gt.height();
  const std::size_t w = entry.gt.width();

  if (auto t = load("pred", required.pred)) {
    std::size_t ph = 0, pw = 0;
    if (t->dtype() == Dtype::F32) {
      ProbMap probs = prob_map_from(*t, source("pred"));
      ph = probs.height();
      pw = probs.width();
      entry.pred = std::move(probs);
    } else {
      LabelMap labels = label_map_from(*t, source("pred"));
      ph = labels.height();
      pw = labels.width();
      entry.pred = std::move(labels);
    }
    if (ph == h && pw == w) {
      entry.pred_resolution = PredResolution::Full;
    } else if (h % 4 == 0 && w % 4 == 0 && ph * 4 == h && pw * 4 == w) {
      entry.pred_resolution = PredResolution::Quarter;
    } else {
      fail(ErrorKind::ShapeMismatch,
           fmt::format("{}: prediction {}x{} is neither {}x{} nor a quarter of it", source("pred"),
                       ph, pw, h, w));
    }
  }
  if (auto t = load("depth", required.depth)) {
    DepthMap depth = depth_map_from(*t, source("depth"));
    if (depth.height() != h || depth.width() != w)
      fail(ErrorKind::ShapeMismatch,
           fmt::format("{}: depth {}x{} does not match gt {}x{}", source("depth"), depth.height(),
                       depth.width(), h, w));
    entry.depth = std::move(depth);
  }
  if (auto t = load("masks", required.masks)) {
    PersonMaskSet masks = person_masks_from(*t, source("masks"));
    if (masks.count() > 0 && (masks.height() != h || masks.width() != w))
      fail(ErrorKind::ShapeMismatch,
           fmt::format("{}: masks {}x{} do not match gt {}x{}", source("masks"), masks.height(),
                       masks.width(), h, w));
    entry.masks = std::move(masks);
  }
  if (auto t = load("sim", required.sim)) entry.sim = similarity_from(*t, source("sim"));
  return entry;
}

void write_dataset_entry(const std::filesystem::path& dir, const DatasetEntry& entry) {
  std::filesystem::create_directories(dir);
  write_htf(to_tensor(entry.gt), dataset_file(dir, entry.image_id, "gt"));
  if (entry.pred) {
    const Tensor t = std::visit([](const auto& p) { return to_tensor(p); }, *entry.pred);
    write_htf(t, dataset_file(dir, entry.image_id, "pred"));
  }
  if (entry.depth) write_htf(to_tensor(*entry.depth), dataset_file(dir, entry.image_id, "depth"));
  if (entry.masks) write_htf(to_tensor(*entry.masks), dataset_file(dir, entry.image_id, "masks"));
  if (entry.sim) write_htf(to_tensor(*entry.sim), dataset_file(dir, entry.image_id, "sim"));
}

}  // namespace hotkit
