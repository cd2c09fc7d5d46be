#include "nlchart/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "nlchart/error.hpp"

namespace nlchart {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::kBadCsv: return "BAD_CSV";
    case Errc::kSyntax: return "SYNTAX";
    case Errc::kUnknownOperation: return "UNKNOWN_OPERATION";
    case Errc::kUnknownRole: return "UNKNOWN_ROLE";
    case Errc::kInvalidValue: return "INVALID_VALUE";
    case Errc::kMisaligned: return "MISALIGNED";
    case Errc::kNotFound: return "NOT_FOUND";
    case Errc::kTemplate: return "TEMPLATE";
    case Errc::kIo: return "IO";
  }
  return "UNKNOWN";
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || u >= 0x80;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_digit);
}

// Length of a date literal starting at text[pos], or 0.
std::size_t match_date(std::string_view text, std::size_t pos) {
  auto rest = text.substr(pos);
  auto boundary = [&](std::size_t n) {
    return n == rest.size() || !is_word_char(rest[n]);
  };
  if (rest.size() >= 10 && is_date_literal(rest.substr(0, 10)) && boundary(10)) {
    return 10;
  }
  // M/D/YYYY variants: lengths 8..10
  for (std::size_t n = 10; n >= 8; --n) {
    if (rest.size() >= n && is_date_literal(rest.substr(0, n)) && boundary(n)) return n;
  }
  return 0;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (c == '"') {
      auto close = text.find('"', i + 1);
      if (close != std::string_view::npos) {
        i = close + 1;
        out.push_back({std::string(text.substr(start, i - start)), start, i - start});
        continue;
      }
    }
    if (is_digit(c)) {
      if (auto n = match_date(text, i); n > 0) {
        i += n;
      } else {
        while (i < text.size() && is_digit(text[i])) ++i;
        if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
          ++i;
          while (i < text.size() && is_digit(text[i])) ++i;
        }
      }
      out.push_back({std::string(text.substr(start, i - start)), start, i - start});
      continue;
    }
    if (is_word_char(c)) {
      while (i < text.size() && is_word_char(text[i])) ++i;
      out.push_back({std::string(text.substr(start, i - start)), start, i - start});
      continue;
    }
    ++i;
    out.push_back({std::string(1, c), start, 1});
  }
  return out;
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_phrase(std::string_view s) {
  return to_lower(join(token_texts(s), " "));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double similarity(std::string_view a, std::string_view b) {
  std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

bool is_quoted(std::string_view token) {
  return token.size() >= 2 && token.front() == '"' && token.back() == '"';
}

std::string unquote(std::string_view token) {
  if (is_quoted(token)) return std::string(token.substr(1, token.size() - 2));
  return std::string(token);
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool is_integer_literal(std::string_view s) {
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  return all_digits(s);
}

bool is_date_literal(std::string_view s) {
  auto in_range = [](std::string_view digits, int lo, int hi) {
    if (!all_digits(digits)) return false;
    int v = std::stoi(std::string(digits));
    return v >= lo && v <= hi;
  };
  if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    return all_digits(s.substr(0, 4)) && in_range(s.substr(5, 2), 1, 12) &&
           in_range(s.substr(8, 2), 1, 31);
  }
  auto first = s.find('/');
  if (first == std::string_view::npos) return false;
  auto second = s.find('/', first + 1);
  if (second == std::string_view::npos) return false;
  auto month = s.substr(0, first);
  auto day = s.substr(first + 1, second - first - 1);
  auto year = s.substr(second + 1);
  return month.size() >= 1 && month.size() <= 2 && day.size() >= 1 && day.size() <= 2 &&
         year.size() == 4 && all_digits(year) && in_range(month, 1, 12) && in_range(day, 1, 31);
}

std::string format_number(double value) {
  if (value == 0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(Errc::kInvalidValue, "unformattable number");
  return std::string(buf, ptr);
}

}  // namespace nlchart
