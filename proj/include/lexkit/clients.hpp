#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexkit::clients {

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 256;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  void l2_normalize();
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  // Throws Timeout / EndpointError / MalformedResponse; rejects invalid requests.
  virtual std::string generate(const GenerationRequest& req) = 0;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::size_t dim() const = 0;
  // Returns a unit-normalized vector. Throws EmptyText on empty input.
  virtual EmbeddingVector embed(std::string_view text) = 0;
};

// Offline generator: output is a pure function of (seed, prompt). When the
// prompt carries a QA-generation request it answers with a well-formed QA
// array wrapped in prose, so the full pipeline runs without a live endpoint.
class StubGenerator : public TextGenerator {
 public:
  explicit StubGenerator(std::uint64_t seed = 0) : seed_(seed) {}
  std::string generate(const GenerationRequest& req) override;

 private:
  std::uint64_t seed_;
};

// Deterministic embedder: character n-grams (n = 1..3) feature-hashed into
// `dim` buckets, then L2-normalized.
class HashingEmbedder : public TextEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

// POST {prompt, max_tokens, temperature[, seed]} -> {"text": "..."}.
std::unique_ptr<TextGenerator> make_http_generator(const std::string& endpoint, int timeout_ms);

// POST {"text": "..."} -> {"embedding": [...]}.
std::unique_ptr<TextEmbedder> make_http_embedder(const std::string& endpoint, int timeout_ms,
                                                 std::size_t dim);

struct ClientConfig {
  std::optional<std::string> gen_endpoint;    // env GEN_ENDPOINT
  std::optional<std::string> embed_endpoint;  // env EMBED_ENDPOINT
  int timeout_ms = 10000;                     // config key client.timeout_ms
  std::size_t embed_dim = 256;                // config key embed.dim
  std::uint64_t stub_seed = 0;
  bool force_stub = false;  // --stub

  static ClientConfig from_env();
};

// Stub is selected when the matching endpoint is unset or force_stub is on.
std::unique_ptr<TextGenerator> make_generator(const ClientConfig& config);
std::unique_ptr<TextEmbedder> make_embedder(const ClientConfig& config);

}  // namespace lexkit::clients
