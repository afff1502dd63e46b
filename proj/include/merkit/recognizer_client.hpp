#pragma once

#include "merkit/levels.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace merkit {

// Chat-completion endpoint serving an image-to-LaTeX model.
struct EndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string endpoint_path = "/v1/chat/completions";
  std::string model_name;
  std::string api_key_env;  // environment variable holding the bearer token; empty for none
  // "{instruction}" is replaced with the level's instruction.
  std::string prompt_template = "{instruction}";
  std::array<std::string, 3> instructions = {
      "Transcribe the formula in this image to LaTeX.",
      "Transcribe the paragraph in this image. Keep the text as is and write every formula in LaTeX, "
      "delimited by $...$ or $$...$$.",
      "Transcribe the full page in this image to markup. Keep the text as is and write every formula in "
      "LaTeX, delimited by $...$ or $$...$$.",
  };
  int max_retries = 3;  // total attempts per record
  int parallelism = 4;
  int timeout_s = 120;
  int backoff_ms = 500;  // doubled after every failed attempt
  double temperature = 0.0;
  int max_tokens = 4096;

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

EndpointConfig load_endpoint_config(const std::filesystem::path& path);

struct EvalRecord {
  std::string record_id;
  SampleLevel level = SampleLevel::Line;
  std::string gt_latex;
  std::string pred_latex;
  std::int64_t latency_ms = 0;
  int attempt = 0;
  std::optional<std::string> error;

  bool operator==(const EvalRecord&) const = default;
};

class EndpointError : public std::runtime_error {
 public:
  EndpointError(int status, std::string body_excerpt);

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

struct RecognitionItem {
  std::string record_id;
  SampleLevel level = SampleLevel::Line;
  std::string gt_latex;
  std::filesystem::path image_path;
};

std::string build_prompt(SampleLevel level, const EndpointConfig& config);

// JSON request body with the prompt text and the image as a base64 data URL.
std::string build_request_body(const std::string& prompt, const std::string& mime_type,
                               const std::string& image_base64, const EndpointConfig& config);

// MIME type from the file extension, or nullopt when unsupported.
std::optional<std::string> image_mime_type(const std::filesystem::path& path);

// Pulls the LaTeX answer out of a model reply: the first fenced code block, else
// (Line level only) the first $$...$$ or \[...\] block, else the whole trimmed reply.
std::string extract_latex(std::string_view reply, SampleLevel level);

// Text of the first choice of a chat-completion response. Throws
// std::invalid_argument when the body has no such field.
std::string response_content(std::string_view body);

// One request with retries on transport failures, 429 and 5xx. Failures are
// reported in EvalRecord::error, never thrown.
EvalRecord recognize(const RecognitionItem& item, const EndpointConfig& config);
EvalRecord recognize(const std::filesystem::path& image_path, SampleLevel level, const EndpointConfig& config);

// Persisted predictions keyed by record_id (JSONL, later lines win).
class PredictionCache {
 public:
  explicit PredictionCache(std::filesystem::path path);

  // The cached record, if it holds a prediction (errors are not cached results).
  std::optional<EvalRecord> find(const std::string& record_id) const;
  void store(const EvalRecord& record);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::map<std::string, EvalRecord> records_;
};

// Recognizes all items with at most config.parallelism requests in flight. The
// output is in input order. Cached predictions are reused and not re-sent.
std::vector<EvalRecord> run_batch(const std::vector<RecognitionItem>& items, const EndpointConfig& config,
                                  PredictionCache* cache = nullptr);

// DIR/<record_id>.<ext> for the first supported extension that exists.
std::optional<std::filesystem::path> find_image(const std::filesystem::path& dir, const std::string& record_id);

}  // namespace merkit
