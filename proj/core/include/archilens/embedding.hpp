#pragma once

#include <cstddef>
#include <vector>

namespace archilens {

using EmbeddingVec = std::vector<double>;

/// Throw DimensionMismatch if the vector does not have `expected_dims`
/// entries, or Error subclasses for non-finite values.
void validate_embedding(const EmbeddingVec& v, std::size_t expected_dims);

double norm(const EmbeddingVec& v);

/// In-place scale to unit L2 norm. Throws DomainError on zero norm.
void normalize(EmbeddingVec& v);

/// Element-wise mean of a non-empty set of equal-length vectors.
EmbeddingVec mean_embedding(const std::vector<EmbeddingVec>& vs);

}  // namespace archilens
