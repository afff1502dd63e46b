#include "merkit/records_io.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace merkit {

using nlohmann::json;

namespace {

// Typed field access that reports failures as SchemaError(line, dotted field path).
class Reader {
 public:
  Reader(const json& object, std::size_t line_no, std::string path = {})
      : object_(object), line_no_(line_no), path_(std::move(path)) {
    if (!object_.is_object()) fail({}, "expected an object");
  }

  bool has(const char* key) const { return object_.contains(key) && !object_.at(key).is_null(); }

  const json& raw(const char* key) const {
    if (!object_.contains(key)) fail(key, "missing");
    return object_.at(key);
  }

  std::string string(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const char* key, std::string fallback) const {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const char* key) const {
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected a boolean");
    return v.get<bool>();
  }
  bool boolean_or(const char* key, bool fallback) const { return has(key) ? boolean(key) : fallback; }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::uint64_t count_or(const char* key, std::uint64_t fallback) const { return has(key) ? count(key) : fallback; }

  std::int64_t integer(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }
  int int_or(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const std::int64_t v = integer(key);
    if (v < INT32_MIN || v > INT32_MAX) fail(key, "out of range");
    return static_cast<int>(v);
  }

  SampleLevel level(const char* key) const {
    const auto parsed = parse_level(string(key));
    if (!parsed) fail(key, "unknown level");
    return *parsed;
  }

  Reader child(const char* key) const {
    const json& v = raw(key);
    if (!v.is_object()) fail(key, "expected an object");
    return Reader(v, line_no_, field(key));
  }

  const json& array(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected an array");
    return v;
  }

  std::size_t line_no() const { return line_no_; }
  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  [[noreturn]] void fail(std::string_view key, const std::string& detail) const {
    throw SchemaError(line_no_, key.empty() ? (path_.empty() ? "<root>" : path_) : field(key), detail);
  }

 private:
  const json& object_;
  std::size_t line_no_;
  std::string path_;
};

json parse(std::string_view text, std::size_t line_no) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError(line_no, "<root>", "invalid JSON");
  return doc;
}

json level_json(SampleLevel level) { return std::string(level_tag(level)); }

json encode(const PageDocument& p) {
  return {{"page_id", p.page_id},
          {"url", p.url},
          {"format", p.format == PageFormat::Html ? "html" : "markdown"},
          {"body", p.body}};
}

PageDocument decode_page(const Reader& r) {
  PageDocument p;
  p.page_id = r.string("page_id");
  p.url = r.string_or("url", "");
  p.body = r.string("body");
  const std::string format = r.string_or("format", "html");
  if (format == "html" || format == "Html" || format == "HTML") {
    p.format = PageFormat::Html;
  } else if (format == "markdown" || format == "Markdown" || format == "md") {
    p.format = PageFormat::Markdown;
  } else {
    r.fail("format", "expected \"html\" or \"markdown\"");
  }
  return p;
}

json encode(const FormulaRecord& f) {
  return {{"record_id", f.record_id},
          {"level", level_json(f.level)},
          {"latex", f.latex},
          {"source_page_id", f.source_page_id},
          {"dedup_key", f.dedup_key ? json(f.dedup_key->hex()) : json(nullptr)}};
}

FormulaRecord decode_record(const Reader& r) {
  FormulaRecord f;
  f.record_id = r.string("record_id");
  f.level = r.level("level");
  f.latex = r.string("latex");
  f.source_page_id = r.string_or("source_page_id", "");
  if (r.has("dedup_key")) {
    f.dedup_key = Digest128::from_hex(r.string("dedup_key"));
    if (!f.dedup_key) r.fail("dedup_key", "expected 32 hex digits");
  }
  return f;
}

json encode(const ManifestEntry& e) {
  return {{"record_id", e.record_id}, {"latex", e.latex}, {"display_mode", e.display_mode}, {"scale", e.scale}};
}

ManifestEntry decode_manifest(const Reader& r) {
  ManifestEntry e;
  e.record_id = r.string("record_id");
  e.latex = r.string("latex");
  e.display_mode = r.boolean_or("display_mode", true);
  e.scale = r.number_or("scale", 1.0);
  if (!(e.scale > 0.0)) r.fail("scale", "must be positive");
  return e;
}

json encode(const GlyphLayout& l) {
  json glyphs = json::array();
  for (const GlyphBox& g : l.glyphs) glyphs.push_back({{"ch", g.ch}, {"x", g.x}, {"y", g.y}, {"w", g.w}, {"h", g.h}});
  return {{"record_id", l.record_id},
          {"render_ok", l.render_ok},
          {"error_message", l.error_message},
          {"bounds",
           {{"min_x", l.bounds.min_x}, {"min_y", l.bounds.min_y}, {"max_x", l.bounds.max_x}, {"max_y", l.bounds.max_y}}},
          {"glyphs", glyphs}};
}

GlyphLayout decode_layout(const Reader& r) {
  GlyphLayout l;
  l.record_id = r.string("record_id");
  l.render_ok = r.boolean("render_ok");
  l.error_message = r.string_or("error_message", "");
  if (l.render_ok || r.has("bounds")) {
    const Reader b = r.child("bounds");
    l.bounds = Bounds{b.number("min_x"), b.number("min_y"), b.number("max_x"), b.number("max_y")};
  }
  if (l.render_ok || r.has("glyphs")) {
    for (const json& item : r.array("glyphs")) {
      const Reader g(item, r.line_no(), "glyphs");
      l.glyphs.push_back({g.string("ch"), g.number("x"), g.number("y"), g.number("w"), g.number("h")});
    }
  }
  if (!l.render_ok && l.error_message.empty()) r.fail("error_message", "required when render_ok is false");
  validate_layout(l, r.line_no());
  return l;
}

json encode(const EvalRecord& e) {
  return {{"record_id", e.record_id},
          {"level", level_json(e.level)},
          {"gt_latex", e.gt_latex},
          {"pred_latex", e.pred_latex},
          {"latency_ms", e.latency_ms},
          {"attempt", e.attempt},
          {"error", e.error ? json(*e.error) : json(nullptr)}};
}

EvalRecord decode_eval(const Reader& r) {
  EvalRecord e;
  e.record_id = r.string("record_id");
  e.level = r.level("level");
  e.gt_latex = r.string_or("gt_latex", "");
  e.pred_latex = r.string_or("pred_latex", "");
  e.latency_ms = static_cast<std::int64_t>(r.count_or("latency_ms", 0));
  e.attempt = static_cast<int>(r.count_or("attempt", 0));
  if (r.has("error")) e.error = r.string("error");
  return e;
}

json encode(const EndpointConfig& c) {
  json instructions = json::object();
  for (SampleLevel level : kAllLevels) instructions[std::string(level_tag(level))] = c.instructions[level_index(level)];
  return {{"base_url", c.base_url},
          {"endpoint_path", c.endpoint_path},
          {"model_name", c.model_name},
          {"api_key_env", c.api_key_env},
          {"prompt_template", c.prompt_template},
          {"instructions", instructions},
          {"max_retries", c.max_retries},
          {"parallelism", c.parallelism},
          {"timeout_s", c.timeout_s},
          {"backoff_ms", c.backoff_ms},
          {"temperature", c.temperature},
          {"max_tokens", c.max_tokens}};
}

EndpointConfig decode_endpoint(const Reader& r) {
  EndpointConfig c;
  c.base_url = r.string("base_url");
  c.endpoint_path = r.string_or("endpoint_path", c.endpoint_path);
  c.model_name = r.string_or("model_name", c.model_name);
  c.api_key_env = r.string_or("api_key_env", c.api_key_env);
  c.prompt_template = r.string_or("prompt_template", c.prompt_template);
  if (r.has("instructions")) {
    const Reader ins = r.child("instructions");
    for (SampleLevel level : kAllLevels) {
      const std::string tag(level_tag(level));
      c.instructions[level_index(level)] = ins.string_or(tag.c_str(), c.instructions[level_index(level)]);
    }
  }
  c.max_retries = r.int_or("max_retries", c.max_retries);
  c.parallelism = r.int_or("parallelism", c.parallelism);
  c.timeout_s = r.int_or("timeout_s", c.timeout_s);
  c.backoff_ms = r.int_or("backoff_ms", c.backoff_ms);
  c.temperature = r.number_or("temperature", c.temperature);
  c.max_tokens = r.int_or("max_tokens", c.max_tokens);
  return c;
}

json encode(const ScoreRecord& s) {
  return {{"record_id", s.record_id},
          {"level", level_json(s.level)},
          {"system", s.system},
          {"ed", s.ed},
          {"cdm",
           {{"precision", s.cdm.precision},
            {"recall", s.cdm.recall},
            {"f1", s.cdm.f1},
            {"matched", s.cdm.matched},
            {"pred_total", s.cdm.pred_total},
            {"gt_total", s.cdm.gt_total}}},
          {"error", s.error ? json(*s.error) : json(nullptr)},
          {"tau", s.tau},
          {"normalization", s.normalization}};
}

ScoreRecord decode_score(const Reader& r) {
  ScoreRecord s;
  s.record_id = r.string("record_id");
  s.level = r.level("level");
  s.system = r.string_or("system", "");
  s.ed = r.number("ed");
  if (!(s.ed >= 0.0 && s.ed <= 1.0)) r.fail("ed", "must lie in [0, 1]");
  const Reader c = r.child("cdm");
  s.cdm.precision = c.number("precision");
  s.cdm.recall = c.number("recall");
  s.cdm.f1 = c.number("f1");
  if (!(s.cdm.f1 >= 0.0 && s.cdm.f1 <= 1.0)) c.fail("f1", "must lie in [0, 1]");
  s.cdm.matched = c.count_or("matched", 0);
  s.cdm.pred_total = c.count_or("pred_total", 0);
  s.cdm.gt_total = c.count_or("gt_total", 0);
  if (r.has("error")) s.error = r.string("error");
  s.tau = r.number_or("tau", kDefaultTau);
  s.normalization = r.string_or("normalization", "");
  return s;
}

json encode(const ExtractionStats& s) {
  json per_level = json::object();
  for (SampleLevel level : kAllLevels) per_level[std::string(level_tag(level))] = s.records_per_level[level_index(level)];
  return {{"pages", s.pages},
          {"spans_found", s.spans_found},
          {"spans_dropped_lex_error", s.spans_dropped_lex_error},
          {"records_per_level", per_level}};
}

ExtractionStats decode_extraction_stats(const Reader& r) {
  ExtractionStats s;
  s.pages = r.count("pages");
  s.spans_found = r.count("spans_found");
  s.spans_dropped_lex_error = r.count("spans_dropped_lex_error");
  const Reader per_level = r.child("records_per_level");
  for (SampleLevel level : kAllLevels) {
    const std::string tag(level_tag(level));
    s.records_per_level[level_index(level)] = per_level.count_or(tag.c_str(), 0);
  }
  return s;
}

json encode(const DedupStats& s) {
  return {{"level", level_json(s.level)}, {"before", s.before}, {"kept", s.kept},
          {"dropped", s.dropped},         {"train", s.train},   {"test", s.test}};
}

DedupStats decode_dedup_stats(const Reader& r) {
  DedupStats s;
  s.level = r.level("level");
  s.before = r.count("before");
  s.kept = r.count("kept");
  s.dropped = r.count("dropped");
  s.train = r.count_or("train", 0);
  s.test = r.count_or("test", 0);
  return s;
}

json encode(const SplitManifest& m) {
  return {{"seed", m.seed}, {"test_per_level", m.test_per_level}, {"test_ids", m.test_ids}};
}

SplitManifest decode_split_manifest(const Reader& r) {
  SplitManifest m;
  m.seed = r.count("seed");
  m.test_per_level = r.count("test_per_level");
  for (const json& id : r.array("test_ids")) {
    if (!id.is_string()) r.fail("test_ids", "expected strings");
    m.test_ids.push_back(id.get<std::string>());
  }
  return m;
}

template <class T>
T decode(const Reader& r);

template <> PageDocument decode(const Reader& r) { return decode_page(r); }
template <> FormulaRecord decode(const Reader& r) { return decode_record(r); }
template <> ManifestEntry decode(const Reader& r) { return decode_manifest(r); }
template <> GlyphLayout decode(const Reader& r) { return decode_layout(r); }
template <> EvalRecord decode(const Reader& r) { return decode_eval(r); }
template <> EndpointConfig decode(const Reader& r) { return decode_endpoint(r); }
template <> ScoreRecord decode(const Reader& r) { return decode_score(r); }
template <> ExtractionStats decode(const Reader& r) { return decode_extraction_stats(r); }
template <> DedupStats decode(const Reader& r) { return decode_dedup_stats(r); }
template <> SplitManifest decode(const Reader& r) { return decode_split_manifest(r); }

}  // namespace

template <class T>
T parse_json_line(std::string_view line, std::size_t line_no) {
  const json doc = parse(line, line_no);
  return decode<T>(Reader(doc, line_no));
}

template <class T>
std::string to_json_line(const T& value) {
  return encode(value).dump(-1, ' ', false, json::error_handler_t::replace);
}

template <class T>
std::string to_json_document(const T& value) {
  return encode(value).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

#define MERKIT_JSON_CODEC(T)                                          \
  template T parse_json_line<T>(std::string_view, std::size_t);      \
  template std::string to_json_line<T>(const T&);                    \
  template std::string to_json_document<T>(const T&);

MERKIT_JSON_CODEC(PageDocument)
MERKIT_JSON_CODEC(FormulaRecord)
MERKIT_JSON_CODEC(ManifestEntry)
MERKIT_JSON_CODEC(GlyphLayout)
MERKIT_JSON_CODEC(EvalRecord)
MERKIT_JSON_CODEC(EndpointConfig)
MERKIT_JSON_CODEC(ScoreRecord)
MERKIT_JSON_CODEC(ExtractionStats)
MERKIT_JSON_CODEC(DedupStats)
MERKIT_JSON_CODEC(SplitManifest)

#undef MERKIT_JSON_CODEC

std::vector<DedupStats> parse_dedup_stats(std::string_view document) {
  const json doc = parse(document, 1);
  if (!doc.is_array()) throw SchemaError(1, "<root>", "expected an array of level stats");
  std::vector<DedupStats> out;
  for (const json& item : doc) out.push_back(decode_dedup_stats(Reader(item, 1)));
  return out;
}

std::string dedup_stats_document(const std::array<DedupStats, 3>& stats) {
  json doc = json::array();
  for (const DedupStats& s : stats) doc.push_back(encode(s));
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace merkit
