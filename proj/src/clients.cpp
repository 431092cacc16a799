#include "lexkit/clients.hpp"

#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "lexkit/errors.hpp"
#include "lexkit/rng.hpp"
#include "lexkit/text.hpp"

namespace lexkit::clients {

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

void EmbeddingVector::l2_normalize() {
  const double n = norm();
  if (n > 0.0)
    for (double& v : values) v /= n;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.values.size() && i < b.values.size(); ++i)
    s += a.values[i] * b.values[i];
  return s;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

namespace {

void validate_request(const GenerationRequest& req) {
  if (req.max_tokens < 1) throw Error("max_tokens must be >= 1");
  if (req.temperature < 0.0) throw Error("temperature must be >= 0");
}

}  // namespace

std::string StubGenerator::generate(const GenerationRequest& req) {
  validate_request(req);
  const std::uint64_t key = seed_ ^ (req.seed ? *req.seed : 0) ^ fnv1a64(req.prompt);
  Rng rng(key);

  // QA-generation prompts get a parseable QA array back.
  static const std::regex num_qa_re("generate\\s+([0-9]+)\\s+high-quality");
  std::smatch m;
  if (std::regex_search(req.prompt, m, num_qa_re)) {
    int n = std::stoi(m[1].str());
    // Lift a snippet of the embedded legal text so answers vary with input.
    std::string snippet;
    const std::string marker = "legal text:";
    const auto pos = req.prompt.find(marker);
    if (pos != std::string::npos) {
      const auto cps = text::codepoints(req.prompt.substr(pos + marker.size()));
      for (std::size_t i = 0; i < cps.size() && i < 40; ++i) {
        if (cps[i] == '\n' && i > 0) break;
        snippet += text::encode_utf8(cps[i]);
      }
    }
    if (snippet.empty()) snippet = "该法律条文";
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (int i = 1; i <= n; ++i) {
      nlohmann::ordered_json pair;
      pair["input"] = "问题" + std::to_string(i) + "：" + snippet + "的要点是什么？";
      pair["output"] = "要点" + std::to_string(i) + "（摘要编号" +
                       std::to_string(rng.next_below(1000)) + "）：" + snippet;
      arr.push_back(std::move(pair));
    }
    return "好的，以下是根据该文本生成的问答对：\n" + arr.dump() + "\n希望对您有帮助。";
  }

  std::ostringstream out;
  out << "stub-completion-" << std::hex << rng.next_u64();
  return out.str();
}

EmbeddingVector HashingEmbedder::embed(std::string_view text_in) {
  if (text_in.empty()) throw EmptyText("embed requires non-empty text");
  EmbeddingVector vec;
  vec.values.assign(dim_, 0.0);
  for (const auto& gram : text::char_ngrams(text_in, 1, 3))
    vec.values[fnv1a64(gram) % dim_] += 1.0;
  vec.l2_normalize();
  return vec;
}

namespace {

class HttpGenerator : public TextGenerator {
 public:
  HttpGenerator(std::string endpoint, int timeout_ms)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {}

  std::string generate(const GenerationRequest& req) override {
    validate_request(req);
    nlohmann::json body;
    body["prompt"] = req.prompt;
    body["max_tokens"] = req.max_tokens;
    body["temperature"] = req.temperature;
    if (req.seed) body["seed"] = *req.seed;
    const auto res = post_json(endpoint_, "/generate", body.dump(), timeout_ms_);
    try {
      const auto j = nlohmann::json::parse(res);
      return j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("generate response: ") + e.what());
    }
  }

  static std::string post_json(const std::string& endpoint, const char* default_path,
                               const std::string& body, int timeout_ms);

 private:
  std::string endpoint_;
  int timeout_ms_;
};

// Splits "http://host:port/path" into client target and path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint,
                                                   const char* default_path) {
  auto scheme_end = endpoint.find("://");
  std::size_t host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_begin = endpoint.find('/', host_begin);
  if (path_begin == std::string::npos) return {endpoint, default_path};
  return {endpoint.substr(0, path_begin), endpoint.substr(path_begin)};
}

std::string HttpGenerator::post_json(const std::string& endpoint, const char* default_path,
                                     const std::string& body, int timeout_ms) {
  const auto [base, path] = split_endpoint(endpoint, default_path);
  httplib::Client client(base);
  client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write)
      throw Timeout("endpoint timed out: " + endpoint);
    throw EndpointError("endpoint unreachable: " + endpoint);
  }
  if (res->status != 200)
    throw EndpointError("endpoint returned status " + std::to_string(res->status));
  return res->body;
}

class HttpEmbedder : public TextEmbedder {
 public:
  HttpEmbedder(std::string endpoint, int timeout_ms, std::size_t dim)
      : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), dim_(dim) {}

  std::size_t dim() const override { return dim_; }

  EmbeddingVector embed(std::string_view text_in) override {
    if (text_in.empty()) throw EmptyText("embed requires non-empty text");
    nlohmann::json body;
    body["text"] = std::string(text_in);
    const auto res = HttpGenerator::post_json(endpoint_, "/embed", body.dump(), timeout_ms_);
    EmbeddingVector vec;
    try {
      const auto j = nlohmann::json::parse(res);
      vec.values = j.at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("embed response: ") + e.what());
    }
    if (vec.values.empty() || vec.norm() == 0.0)
      throw MalformedResponse("embed response has empty or zero vector");
    vec.l2_normalize();
    return vec;
  }

 private:
  std::string endpoint_;
  int timeout_ms_;
  std::size_t dim_;
};

}  // namespace

std::unique_ptr<TextGenerator> make_http_generator(const std::string& endpoint, int timeout_ms) {
  return std::make_unique<HttpGenerator>(endpoint, timeout_ms);
}

std::unique_ptr<TextEmbedder> make_http_embedder(const std::string& endpoint, int timeout_ms,
                                                 std::size_t dim) {
  return std::make_unique<HttpEmbedder>(endpoint, timeout_ms, dim);
}

ClientConfig ClientConfig::from_env() {
  ClientConfig config;
  if (const char* gen = std::getenv("GEN_ENDPOINT"); gen && *gen) config.gen_endpoint = gen;
  if (const char* emb = std::getenv("EMBED_ENDPOINT"); emb && *emb) config.embed_endpoint = emb;
  return config;
}

std::unique_ptr<TextGenerator> make_generator(const ClientConfig& config) {
  if (config.force_stub || !config.gen_endpoint)
    return std::make_unique<StubGenerator>(config.stub_seed);
  return make_http_generator(*config.gen_endpoint, config.timeout_ms);
}

std::unique_ptr<TextEmbedder> make_embedder(const ClientConfig& config) {
  if (config.force_stub || !config.embed_endpoint)
    return std::make_unique<HashingEmbedder>(config.embed_dim);
  return make_http_embedder(*config.embed_endpoint, config.timeout_ms, config.embed_dim);
}

}  // namespace lexkit::clients
