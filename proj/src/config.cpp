#include "oodknn/config.hpp"

#include <charconv>
#include <string>
#include <utility>
#include <vector>

#include "oodknn/error.hpp"

namespace oodknn {

namespace {

struct Field {
  std::string_view key;
  std::uint64_t value;
};

std::vector<Field> relevant_fields(const ScorerConfig& c) {
  switch (c.method) {
    case Method::Knn:
    case Method::Lof:
      return {{"k", c.k}};
    case Method::Msp:
      return {};
    case Method::Pca:
      return {{"n_components", c.n_components}};
    case Method::IForest:
      return {{"n_estimators", c.n_estimators},
              {"subsample", c.subsample},
              {"seed", c.seed}};
    case Method::Loda:
      return {{"n_bins", c.n_bins},
              {"n_projections", c.n_projections},
              {"seed", c.seed}};
  }
  return {};
}

std::string join(const ScorerConfig& c, char sep) {
  std::string out = "method=";
  out += method_name(c.method);
  for (const auto& [key, value] : relevant_fields(c)) {
    out += sep;
    out += key;
    out += '=';
    out += std::to_string(value);
  }
  return out;
}

std::uint64_t parse_count(std::string_view key, std::string_view text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    fail(ErrorKind::Config, "invalid value '" + std::string(text) + "' for " +
                                std::string(key));
  }
  return value;
}

}  // namespace

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Knn: return "knn";
    case Method::Msp: return "msp";
    case Method::Lof: return "lof";
    case Method::Pca: return "pca";
    case Method::IForest: return "iforest";
    case Method::Loda: return "loda";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::Knn, Method::Msp, Method::Lof, Method::Pca,
                   Method::IForest, Method::Loda}) {
    if (method_name(m) == name) return m;
  }
  fail(ErrorKind::Config, "unknown method '" + std::string(name) + "'");
}

ScorerConfig ScorerConfig::defaults(Method method) {
  ScorerConfig c;
  c.method = method;
  if (method == Method::Lof) c.k = 20;
  return c;
}

std::string ScorerConfig::to_string() const { return join(*this, '\n') + '\n'; }

std::string ScorerConfig::to_inline_string() const { return join(*this, ' '); }

ScorerConfig ScorerConfig::parse(std::string_view text) {
  std::vector<std::pair<std::string_view, std::string_view>> pairs;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find_first_of("\n ", start);
    if (end == std::string_view::npos) end = text.size();
    auto token = text.substr(start, end - start);
    if (!token.empty() && token.back() == '\r') token.remove_suffix(1);
    start = end + 1;
    if (token.empty()) continue;
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::Config, "expected key=value, got '" + std::string(token) + "'");
    }
    pairs.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  if (pairs.empty() || pairs.front().first != "method") {
    fail(ErrorKind::Config, "scorer config must start with method=");
  }
  ScorerConfig c = defaults(parse_method(pairs.front().second));
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    const auto [key, value] = pairs[i];
    const auto n = parse_count(key, value);
    if (key == "k") {
      c.k = n;
    } else if (key == "n_components") {
      c.n_components = n;
    } else if (key == "n_estimators") {
      c.n_estimators = n;
    } else if (key == "subsample") {
      c.subsample = n;
    } else if (key == "n_bins") {
      c.n_bins = n;
    } else if (key == "n_projections") {
      c.n_projections = n;
    } else if (key == "seed") {
      c.seed = n;
    } else {
      fail(ErrorKind::Config, "unknown config key '" + std::string(key) + "'");
    }
  }
  return c;
}

void ScorerConfig::validate() const {
  for (const auto& [key, value] : relevant_fields(*this)) {
    if (key != "seed" && value == 0) {
      fail(ErrorKind::Config, std::string(key) + " must be at least 1");
    }
  }
}

}  // namespace oodknn
