#include "archilens/embedding.hpp"

#include <cmath>

#include "archilens/errors.hpp"

namespace archilens {

void validate_embedding(const EmbeddingVec& v, std::size_t expected_dims) {
    if (v.size() != expected_dims) {
        throw DimensionMismatch("embedding has " + std::to_string(v.size()) +
                                " dims, expected " + std::to_string(expected_dims));
    }
    for (double x : v) {
        if (!std::isfinite(x)) throw DomainError("embedding contains non-finite value");
    }
}

double norm(const EmbeddingVec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(EmbeddingVec& v) {
    const double n = norm(v);
    if (n == 0.0) throw DomainError("cannot normalize zero vector");
    for (double& x : v) x /= n;
}

EmbeddingVec mean_embedding(const std::vector<EmbeddingVec>& vs) {
    if (vs.empty()) throw EmptyInput("mean_embedding requires at least one vector");
    EmbeddingVec out(vs.front().size(), 0.0);
    for (const auto& v : vs) {
        if (v.size() != out.size()) throw DimensionMismatch("mixed embedding dims in mean");
        for (std::size_t i = 0; i < v.size(); ++i) out[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(vs.size());
    for (double& x : out) x *= inv;
    return out;
}

}  // namespace archilens
