#include "cwp/embed.h"

#include <bit>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>

#include "cwp/error.h"
#include "cwp/rng.h"
#include "cwp/text.h"

namespace cwp::embed {
namespace {

constexpr char kMagic[4] = {'C', 'W', 'E', 'M'};
constexpr std::size_t kHeaderBytes = 12;

std::uint32_t read_u32(std::string_view bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<unsigned char>(bytes[at + static_cast<std::size_t>(i)]);
  }
  return v;
}

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim,
                                 std::vector<float> values)
    : ids_(std::move(ids)), dim_(dim), values_(std::move(values)) {
  if (!ids_.empty() && dim_ == 0) throw DataError("embedding dimension must be positive");
  if (values_.size() != ids_.size() * dim_) {
    throw DataError("embedding payload holds " + std::to_string(values_.size()) +
                    " values, expected " + std::to_string(ids_.size() * dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite embedding value in row " + std::to_string(i / dim_));
    }
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw DataError("duplicate embedding id '" + ids_[i] + "'");
    }
  }
}

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<float> values;
  ids.reserve(rows.size());
  values.reserve(rows.size() * dim_);
  for (std::size_t r : rows) {
    ids.push_back(ids_.at(r));
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return EmbeddingMatrix(std::move(ids), dim_, std::move(values));
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  return ids_ == other.ids_ && dim_ == other.dim_ &&
         values_.size() == other.values_.size() &&
         std::memcmp(values_.data(), other.values_.data(),
                     values_.size() * sizeof(float)) == 0;
}

EmbeddingMatrix load_embeddings(std::string_view matrix_bytes, std::string_view ids_bytes) {
  if (matrix_bytes.size() < kHeaderBytes ||
      std::memcmp(matrix_bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("embedding file does not start with CWEM");
  }
  const std::uint64_t rows = read_u32(matrix_bytes, 4);
  const std::uint64_t dim = read_u32(matrix_bytes, 8);
  if (rows > 0 && dim == 0) throw DataError("embedding file has rows but dim 0");
  const std::uint64_t expected = kHeaderBytes + rows * dim * 4;
  if (matrix_bytes.size() != expected) {
    throw DataError("embedding file is " + std::to_string(matrix_bytes.size()) +
                    " bytes; header (" + std::to_string(rows) + " x " +
                    std::to_string(dim) + ") implies " + std::to_string(expected));
  }
  std::vector<float> values(rows * dim);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(read_u32(matrix_bytes, kHeaderBytes + 4 * i));
  }
  std::vector<std::string> ids;
  for (std::string_view line : text::lines(ids_bytes)) ids.emplace_back(line);
  if (ids.size() != rows) {
    throw DataError("ids file has " + std::to_string(ids.size()) + " lines, matrix has " +
                    std::to_string(rows) + " rows");
  }
  for (const std::string& id : ids) {
    if (id.empty()) throw DataError("empty id in embedding ids file");
  }
  return EmbeddingMatrix(std::move(ids), static_cast<std::size_t>(dim), std::move(values));
}

std::string save_matrix(const EmbeddingMatrix& matrix) {
  if (matrix.rows() > UINT32_MAX || matrix.dim() > UINT32_MAX) {
    throw DataError("embedding matrix too large for the CWEM header");
  }
  std::string out(kMagic, sizeof(kMagic));
  out.reserve(kHeaderBytes + matrix.values().size() * 4);
  append_u32(out, static_cast<std::uint32_t>(matrix.rows()));
  append_u32(out, static_cast<std::uint32_t>(matrix.dim()));
  for (float v : matrix.values()) append_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

std::string save_ids(const EmbeddingMatrix& matrix) {
  std::string out;
  for (const std::string& id : matrix.ids()) {
    if (id.find('\n') != std::string::npos) throw DataError("embedding id contains a newline");
    out += id;
    out += '\n';
  }
  return out;
}

std::vector<float> hashed_bow_embed(const corpus::Sentence& sentence, std::size_t dim,
                                    std::uint64_t seed) {
  if (dim < 2) throw UsageError("hashed embedding dimension must be >= 2");
  std::vector<double> acc(dim, 0.0);
  const std::uint64_t salt = mix64(seed);
  bool any = false;
  for (const std::string& token : text::tokenize_words(sentence.text)) {
    const std::uint64_t h = mix64(fnv1a64(text::fold(token)) ^ salt);
    acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
    any = true;
  }
  std::vector<float> out(dim, 0.0f);
  if (!any) return out;
  double norm = 0.0;
  for (double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  // Collisions can cancel every token; leave that vector at zero.
  if (norm == 0.0) return out;
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return out;
}

EmbeddingMatrix embed_partition(const corpus::DatasetPartition& partition, std::size_t dim,
                                std::uint64_t seed) {
  if (dim < 2) throw UsageError("hashed embedding dimension must be >= 2");
  const std::size_t n = partition.size();
  std::vector<float> values(n * dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::vector<float> v = hashed_bow_embed(partition.sentences[i], dim, seed);
    std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& s : partition.sentences) ids.push_back(s.id);
  return EmbeddingMatrix(std::move(ids), dim, std::move(values));
}

std::vector<ProjectedPoint> project_2d(const EmbeddingMatrix& matrix) {
  const std::size_t n = matrix.rows();
  const std::size_t d = matrix.dim();
  if (n < 2) throw DataError("projection needs at least two rows");
  if (d < 2) throw DataError("projection needs dim >= 2");

  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> raw(matrix.data(), static_cast<Eigen::Index>(n),
                                       static_cast<Eigen::Index>(d));
  Eigen::MatrixXd x = raw.cast<double>();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DataError("eigendecomposition failed");
  const Eigen::Index top = static_cast<Eigen::Index>(d) - 1;
  if (!(solver.eigenvalues()(top) > 1e-12)) {
    throw DataError("projection input is rank-deficient (all rows identical)");
  }

  Eigen::MatrixXd basis(static_cast<Eigen::Index>(d), 2);
  basis.col(0) = solver.eigenvectors().col(top);
  basis.col(1) = solver.eigenvectors().col(top - 1);
  for (Eigen::Index c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0) basis.col(c) *= -1.0;
  }
  const Eigen::MatrixXd projected = x * basis;

  std::vector<ProjectedPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {matrix.ids()[i], projected(static_cast<Eigen::Index>(i), 0),
              projected(static_cast<Eigen::Index>(i), 1)};
  }
  return out;
}

std::string projection_csv(
    std::span<const ProjectedPoint> points,
    const std::unordered_map<std::string, corpus::ClassLabel>& labels,
    const std::unordered_map<std::string, std::string>* stages) {
  std::string out = stages ? "id,x,y,label,stage\n" : "id,x,y,label\n";
  for (const ProjectedPoint& p : points) {
    out += text::csv_field(p.id);
    out += ',';
    out += text::format_number(p.x);
    out += ',';
    out += text::format_number(p.y);
    out += ',';
    if (auto it = labels.find(p.id); it != labels.end()) out += corpus::to_string(it->second);
    if (stages) {
      out += ',';
      if (auto it = stages->find(p.id); it != stages->end()) out += text::csv_field(it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace cwp::embed
