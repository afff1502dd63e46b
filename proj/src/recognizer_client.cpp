#include "merkit/recognizer_client.hpp"

#include "merkit/errors.hpp"
#include "merkit/hashing.hpp"
#include "merkit/records_io.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace merkit {

using nlohmann::json;

namespace {

constexpr std::size_t kExcerptBytes = 200;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::string> between(std::string_view text, std::string_view open, std::string_view close) {
  const std::size_t a = text.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const std::size_t b = text.find(close, a + open.size());
  if (b == std::string_view::npos) return std::nullopt;
  return std::string(trim(text.substr(a + open.size(), b - a - open.size())));
}

std::optional<std::string> fenced_block(std::string_view text) {
  const std::size_t open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t body = open + 3;
  // optional info string such as "latex"
  const std::size_t eol = text.find('\n', body);
  const std::size_t close_probe = text.find("```", body);
  if (eol != std::string_view::npos && (close_probe == std::string_view::npos || eol < close_probe)) {
    const std::string_view info = text.substr(body, eol - body);
    if (std::all_of(info.begin(), info.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == ' '; })) {
      body = eol + 1;
    }
  }
  const std::size_t close = text.find("```", body);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(trim(text.substr(body, close - body)));
}

std::string excerpt(std::string_view body) { return std::string(body.substr(0, kExcerptBytes)); }

bool retryable(int status) { return status == 429 || status >= 500; }

std::int64_t elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since).count();
}

std::optional<std::string> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint base_url must be nonempty");
  if (parallelism < 1) throw ConfigError("endpoint parallelism must be at least 1");
  if (max_retries < 1) throw ConfigError("endpoint max_retries must be at least 1");
  if (timeout_s < 1) throw ConfigError("endpoint timeout_s must be at least 1");
  if (backoff_ms < 0) throw ConfigError("endpoint backoff_ms must be nonnegative");
}

EndpointConfig load_endpoint_config(const std::filesystem::path& path) {
  const auto text = read_file(path);
  if (!text) throw ConfigError("cannot read endpoint config " + path.string());
  EndpointConfig config;
  try {
    config = parse_json_line<EndpointConfig>(*text, 1);
  } catch (const DataError& e) {
    throw ConfigError(std::string("endpoint config: ") + e.what());
  }
  config.validate();
  return config;
}

EndpointError::EndpointError(int status, std::string body_excerpt)
    : std::runtime_error("endpoint returned HTTP " + std::to_string(status) + ": " + body_excerpt),
      status_(status),
      body_excerpt_(std::move(body_excerpt)) {}

std::string build_prompt(SampleLevel level, const EndpointConfig& config) {
  std::string prompt = config.prompt_template;
  const std::string& instruction = config.instructions[level_index(level)];
  static constexpr std::string_view kPlaceholder = "{instruction}";
  const std::size_t at = prompt.find(kPlaceholder);
  if (at == std::string::npos) return prompt.empty() ? instruction : prompt;
  prompt.replace(at, kPlaceholder.size(), instruction);
  return prompt;
}

std::string build_request_body(const std::string& prompt, const std::string& mime_type,
                               const std::string& image_base64, const EndpointConfig& config) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  content.push_back(
      {{"type", "image_url"}, {"image_url", {{"url", "data:" + mime_type + ";base64," + image_base64}}}});
  json body = {{"model", config.model_name},
               {"temperature", config.temperature},
               {"max_tokens", config.max_tokens},
               {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
  return body.dump();
}

std::optional<std::string> image_mime_type(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".svg") return "image/svg+xml";
  return std::nullopt;
}

std::string extract_latex(std::string_view reply, SampleLevel level) {
  if (auto fenced = fenced_block(reply)) return *fenced;
  if (level == SampleLevel::Line) {
    if (auto display = between(reply, "$$", "$$")) return *display;
    if (auto display = between(reply, "\\[", "\\]")) return *display;
  }
  return std::string(trim(reply));
}

std::string response_content(std::string_view body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw std::invalid_argument("response is not JSON");
  if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw std::invalid_argument("response has no choices");
  }
  const json& message = doc["choices"][0].value("message", json::object());
  const json content = message.value("content", json());
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const json& part : content) {
      if (part.is_object() && part.value("type", "") == "text") text += part.value("text", "");
    }
    return text;
  }
  throw std::invalid_argument("response message has no text content");
}

EvalRecord recognize(const RecognitionItem& item, const EndpointConfig& config) {
  EvalRecord rec;
  rec.record_id = item.record_id;
  rec.level = item.level;
  rec.gt_latex = item.gt_latex;
  const auto start = std::chrono::steady_clock::now();

  const auto mime = image_mime_type(item.image_path);
  if (!mime) {
    rec.error = "unsupported image format: " + item.image_path.string();
    return rec;
  }
  const auto image = read_file(item.image_path);
  if (!image) {
    rec.error = "cannot read image: " + item.image_path.string();
    return rec;
  }
  const std::string encoded =
      base64_encode({reinterpret_cast<const std::uint8_t*>(image->data()), image->size()});
  const std::string body = build_request_body(build_prompt(item.level, config), *mime, encoded, config);

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  httplib::Client client(config.base_url);
  client.set_connection_timeout(config.timeout_s, 0);
  client.set_read_timeout(config.timeout_s, 0);
  client.set_write_timeout(config.timeout_s, 0);

  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, config.max_retries); ++attempt) {
    rec.attempt = attempt;
    bool retry = false;
    const auto res = client.Post(config.endpoint_path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      retry = true;
    } else if (res->status >= 200 && res->status < 300) {
      try {
        rec.pred_latex = extract_latex(response_content(res->body), item.level);
        rec.error.reset();
        rec.latency_ms = elapsed_ms(start);
        return rec;
      } catch (const std::exception& e) {
        last_error = std::string("malformed response: ") + e.what() + ": " + excerpt(res->body);
      }
    } else {
      last_error = EndpointError(res->status, excerpt(res->body)).what();
      retry = retryable(res->status);
    }
    if (!retry) break;
    if (attempt < config.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(config.backoff_ms) << (attempt - 1)));
    }
  }
  rec.error = last_error;
  rec.latency_ms = elapsed_ms(start);
  return rec;
}

EvalRecord recognize(const std::filesystem::path& image_path, SampleLevel level, const EndpointConfig& config) {
  return recognize(RecognitionItem{image_path.stem().string(), level, {}, image_path}, config);
}

PredictionCache::PredictionCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  for (EvalRecord& r : read_jsonl<EvalRecord>(path_)) {
    const std::string id = r.record_id;
    records_.insert_or_assign(id, std::move(r));
  }
}

std::optional<EvalRecord> PredictionCache::find(const std::string& record_id) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(record_id);
  if (it == records_.end() || it->second.error) return std::nullopt;
  return it->second;
}

void PredictionCache::store(const EvalRecord& record) {
  std::lock_guard lock(mutex_);
  append_jsonl(path_, record);
  records_.insert_or_assign(record.record_id, record);
}

std::size_t PredictionCache::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::vector<EvalRecord> run_batch(const std::vector<RecognitionItem>& items, const EndpointConfig& config,
                                  PredictionCache* cache) {
  config.validate();
  std::vector<EvalRecord> results(items.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (cache) {
      if (auto hit = cache->find(items[i].record_id)) {
        results[i] = std::move(*hit);
        continue;
      }
    }
    pending.push_back(i);
  }
  if (pending.empty()) return results;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const std::size_t i = pending[k];
      results[i] = recognize(items[i], config);
      if (cache) cache->store(results[i]);
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), pending.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  }
  return results;
}

std::optional<std::filesystem::path> find_image(const std::filesystem::path& dir, const std::string& record_id) {
  static constexpr std::array<std::string_view, 7> kExtensions = {".png", ".jpg", ".jpeg", ".webp",
                                                                   ".gif", ".bmp", ".svg"};
  for (std::string_view ext : kExtensions) {
    std::filesystem::path candidate = dir / (record_id + std::string(ext));
    if (std::filesystem::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace merkit
