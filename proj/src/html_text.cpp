#include "html_text.hpp"

#include "merkit/utf8.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace merkit::detail {

namespace {

class ViewBuilder {
 public:
  void append(std::string_view bytes, std::size_t begin, std::size_t end) {
    for (char c : bytes) {
      view_.text.push_back(c);
      view_.origin_begin.push_back(begin);
      view_.origin_end.push_back(end);
    }
  }

  // Blank line unless the view already ends in one (or is empty).
  void paragraph_break(std::size_t begin, std::size_t end) {
    const std::string& t = view_.text;
    if (t.empty() || (t.size() >= 2 && t.ends_with("\n\n"))) return;
    append(t.back() == '\n' ? "\n" : "\n\n", begin, end);
  }

  TextView finish() { return std::move(view_); }

 private:
  TextView view_;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_block_tag(std::string_view name) {
  static constexpr std::array<std::string_view, 28> kBlock = {
      "p",      "div",  "li",      "ul",    "ol",  "h1",         "h2",      "h3",     "h4",      "h5",
      "h6",     "pre",  "table",   "tr",    "td",  "th",         "section", "article", "header", "footer",
      "hr",     "main", "aside",   "nav",   "dl",  "blockquote", "figure",  "body"};
  return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
}

std::string encode_scalar(char32_t cp) { return utf8::encode(std::u32string_view(&cp, 1)); }

// Decodes the entity at body[pos] == '&'. Returns the decoded text and its length
// in the body, or an empty length when this is not a recognised entity.
std::pair<std::string, std::size_t> decode_entity(std::string_view body, std::size_t pos) {
  const std::size_t semi = body.find(';', pos + 1);
  if (semi == std::string_view::npos || semi - pos > 12) return {{}, 0};
  const std::string_view name = body.substr(pos + 1, semi - pos - 1);
  const std::size_t len = semi - pos + 1;
  if (name.size() >= 2 && name[0] == '#') {
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const std::string_view digits = name.substr(hex ? 2 : 1);
    std::uint32_t cp = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) return {{}, 0};
    if (cp == 0 || cp > 0x10FFFF) return {{}, 0};
    return {encode_scalar(static_cast<char32_t>(cp)), len};
  }
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kNamed = {{
      {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""}, {"apos", "'"}, {"nbsp", " "}, {"#39", "'"},
  }};
  for (const auto& [key, value] : kNamed) {
    if (name == key) return {std::string(value), len};
  }
  return {{}, 0};
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  const std::string lowered = lower(hay.substr(std::min(from, hay.size())));
  const std::size_t at = lowered.find(needle);
  return at == std::string::npos ? std::string_view::npos : at + from;
}

}  // namespace

std::size_t TextView::view_index_at(std::size_t offset) const {
  return static_cast<std::size_t>(std::lower_bound(origin_begin.begin(), origin_begin.end(), offset) -
                                  origin_begin.begin());
}

std::size_t TextView::view_index_until(std::size_t offset) const {
  return static_cast<std::size_t>(std::upper_bound(origin_end.begin(), origin_end.end(), offset) -
                                  origin_end.begin());
}

TextView html_text_view(std::string_view body) {
  ViewBuilder out;
  std::size_t i = 0;
  while (i < body.size()) {
    const char c = body[i];
    if (c == '<') {
      if (body.substr(i, 4) == "<!--") {
        const std::size_t close = body.find("-->", i + 4);
        i = close == std::string_view::npos ? body.size() : close + 3;
        continue;
      }
      const std::size_t close = body.find('>', i + 1);
      const bool closing = i + 1 < body.size() && body[i + 1] == '/';
      const std::size_t name_start = i + (closing ? 2 : 1);
      const bool tag_like = name_start < body.size() &&
                            (std::isalpha(static_cast<unsigned char>(body[name_start])) || body[name_start] == '!');
      if (close == std::string_view::npos || !tag_like) {
        out.append("<", i, i + 1);
        ++i;
        continue;
      }
      std::size_t name_end = name_start;
      while (name_end < close && std::isalnum(static_cast<unsigned char>(body[name_end]))) ++name_end;
      const std::string name = lower(body.substr(name_start, name_end - name_start));
      if (!closing && (name == "script" || name == "style")) {
        const std::size_t end_tag = find_ci(body, "</" + name, close + 1);
        const std::size_t end_close = end_tag == std::string_view::npos ? std::string_view::npos : body.find('>', end_tag);
        i = end_close == std::string_view::npos ? body.size() : end_close + 1;
        continue;
      }
      if (name == "br") {
        out.append("\n", i, close + 1);
      } else if (is_block_tag(name)) {
        out.paragraph_break(i, close + 1);
      }
      i = close + 1;
      continue;
    }
    if (c == '&') {
      auto [decoded, len] = decode_entity(body, i);
      if (len > 0) {
        out.append(decoded, i, i + len);
        i += len;
        continue;
      }
    }
    out.append(body.substr(i, 1), i, i + 1);
    ++i;
  }
  return out.finish();
}

TextView markdown_text_view(std::string_view body) {
  ViewBuilder out;
  std::size_t i = 0;
  bool line_start = true;
  while (i < body.size()) {
    if (line_start) {
      std::size_t j = i;
      while (j < body.size() && (body[j] == ' ' || body[j] == '\t')) ++j;
      const std::string_view rest = body.substr(j);
      if (rest.starts_with("```") || rest.starts_with("~~~")) {
        const std::string_view fence = rest.substr(0, 3);
        std::size_t k = body.find('\n', j);
        std::size_t end = body.size();
        while (k != std::string_view::npos) {
          std::size_t m = k + 1;
          while (m < body.size() && (body[m] == ' ' || body[m] == '\t')) ++m;
          if (body.substr(m).starts_with(fence)) {
            const std::size_t eol = body.find('\n', m);
            end = eol == std::string_view::npos ? body.size() : eol;
            break;
          }
          k = body.find('\n', m);
        }
        out.paragraph_break(i, end);
        i = end;
        line_start = false;
        continue;
      }
    }
    const char c = body[i];
    if (c == '\\' && i + 1 < body.size()) {
      out.append(body.substr(i, 1), i, i + 1);
      out.append(body.substr(i + 1, 1), i + 1, i + 2);
      line_start = body[i + 1] == '\n';
      i += 2;
      continue;
    }
    if (c == '`') {
      std::size_t run = 1;
      while (i + run < body.size() && body[i + run] == '`') ++run;
      const std::string ticks(run, '`');
      std::size_t close = body.find(ticks, i + run);
      const std::size_t blank = body.find("\n\n", i + run);
      if (close != std::string_view::npos && (blank == std::string_view::npos || close < blank)) {
        out.append(" ", i, close + run);
        i = close + run;
        line_start = false;
        continue;
      }
      out.append(ticks, i, i + run);
      i += run;
      line_start = false;
      continue;
    }
    out.append(body.substr(i, 1), i, i + 1);
    line_start = c == '\n';
    ++i;
  }
  return out.finish();
}

}  // namespace merkit::detail
