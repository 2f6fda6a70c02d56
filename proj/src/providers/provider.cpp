#include "tvdigest/providers/provider.hpp"

#include <cmath>

namespace tvdigest::providers {

void check_request(const CompletionRequest& req) {
  if (req.prompt.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "completion prompt is empty");
  }
  if (req.max_tokens <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
  }
  if (!(req.temperature >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  }
}

EmbeddingVector::EmbeddingVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ProviderError(ErrorCode::kInvalidArgument,
                          "embedding contains a non-finite value");
    }
  }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dimension) {
  return EmbeddingVector(std::vector<double>(dimension, 0.0));
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    throw ProviderError(ErrorCode::kDimensionMismatch,
                        "cosine of vectors with dimensions " +
                            std::to_string(u.dimension()) + " and " +
                            std::to_string(v.dimension()));
  }
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.dimension(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  // Rounding can push |c| a hair past 1.
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

}  // namespace tvdigest::providers
