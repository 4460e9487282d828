#ifndef CWP_EMBED_H_
#define CWP_EMBED_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cwp/corpus.h"

namespace cwp::embed {

// Row-major float matrix with one sentence id per row. Immutable once built.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Throws DataError on size mismatch, duplicate ids, non-finite values, or
  // dim == 0 with rows present.
  EmbeddingMatrix(std::vector<std::string> ids, std::size_t dim,
                  std::vector<float> values);

  std::size_t rows() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return ids_.empty(); }

  std::span<const float> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const float* data() const { return values_.data(); }
  const std::vector<float>& values() const { return values_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> find(std::string_view id) const;

  // New matrix holding the given rows in the given order.
  EmbeddingMatrix select(std::span<const std::size_t> rows) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// .cwem layout: "CWEM", u32 rows, u32 dim, rows*dim f32, all little-endian.
// The ids file has one id per line in row order.
EmbeddingMatrix load_embeddings(std::string_view matrix_bytes,
                                std::string_view ids_bytes);
std::string save_matrix(const EmbeddingMatrix& matrix);
std::string save_ids(const EmbeddingMatrix& matrix);

// Feature-hashed bag of words over lowercased tokens, L2-normalized. Empty
// token lists give the zero vector.
std::vector<float> hashed_bow_embed(const corpus::Sentence& sentence,
                                    std::size_t dim, std::uint64_t seed);

EmbeddingMatrix embed_partition(const corpus::DatasetPartition& partition,
                                std::size_t dim, std::uint64_t seed);

struct ProjectedPoint {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

// Projection onto the top two principal components of the centered rows.
// Component signs are fixed so each axis's largest-magnitude loading is
// positive. Throws DataError for fewer than two rows, dim < 2, or zero
// total variance.
std::vector<ProjectedPoint> project_2d(const EmbeddingMatrix& matrix);

// id,x,y,label[,stage]. Missing labels are written as empty cells.
std::string projection_csv(
    std::span<const ProjectedPoint> points,
    const std::unordered_map<std::string, corpus::ClassLabel>& labels,
    const std::unordered_map<std::string, std::string>* stages = nullptr);

}  // namespace cwp::embed

#endif  // CWP_EMBED_H_
