#include "ciaf/llm.hpp"

#include "ciaf/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace ciaf {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Transport-level failures worth retrying.
class RetryableFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::chrono::milliseconds backoff_delay(const BackendConfig& config, int attempt) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.5, 1.5);
  double base = static_cast<double>(config.backoff_base.count()) * std::pow(config.backoff_factor, attempt);
  return std::chrono::milliseconds{static_cast<long long>(base * jitter(rng))};
}

std::string post_once(const BackendConfig& config, const Endpoint& ep, const std::string& body,
                      const std::optional<std::string>& token) {
  httplib::Client client(ep.origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (token) headers.emplace("Authorization", "Bearer " + *token);

  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res) throw RetryableFailure("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403) {
    throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
  }
  if (res->status == 429 || res->status >= 500) {
    throw RetryableFailure("HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("unexpected HTTP status " + std::to_string(res->status));
  }
  return res->body;
}

std::string response_text(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw UnparseableResponse("response is not JSON");
  try {
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
  } catch (const json::exception&) {
  }
  throw UnparseableResponse("response has no choices[0].message.content string");
}

}  // namespace

void validate(const BackendConfig& config) {
  if (config.kind == BackendKind::Http && (!config.endpoint_url || config.endpoint_url->empty())) {
    throw std::invalid_argument("http backend requires an endpoint URL");
  }
  if (config.parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (config.max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
}

bool predicate_holds(const RulePredicate& predicate, const LikertLevel& cell) {
  auto bound = rank_in(predicate.level, cell.scheme);
  if (!bound) {
    throw Error(ErrorFamily::Analysis, "rule level '" + std::string(identifier(predicate.level)) +
                                           "' is not part of the " + std::string(to_string(cell.scheme)) +
                                           "-level scheme");
  }
  return predicate.comparator == Comparator::AtLeast ? cell.rank >= *bound : cell.rank <= *bound;
}

ClassificationLabel mock_classify(const std::vector<RulePredicate>& rule, const LikertRowView& row) {
  bool all = true;
  for (const auto& p : rule) {
    auto col = resolve_feature(row.columns, p.feature);
    if (!col) throw MissingFeature(p.feature);
    // Evaluate every predicate so a missing feature is reported even when an
    // earlier clause already failed.
    if (!predicate_holds(p, row.levels[*col])) all = false;
  }
  return all ? ClassificationLabel::Malicious : ClassificationLabel::Normal;
}

ClassificationLabel parse_classification(std::string_view text) {
  std::string word;
  auto flush = [&]() -> std::optional<ClassificationLabel> {
    std::optional<ClassificationLabel> hit;
    if (word == "normal" || word == "legit") hit = ClassificationLabel::Normal;
    else if (word == "ransomware" || word == "malicious") hit = ClassificationLabel::Malicious;
    word.clear();
    return hit;
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (auto hit = flush()) {
      return *hit;
    }
  }
  if (auto hit = flush()) return *hit;
  std::string excerpt(text.substr(0, 80));
  throw UnparseableResponse("no classification label in response: \"" + excerpt + "\"");
}

std::string build_chat_body(const ChatRequest& request) {
  json body{{"model", request.model.model_name},
            {"temperature", request.model.temperature},
            {"max_tokens", request.model.max_output_tokens},
            {"messages", json::array({{{"role", "system"}, {"content", request.system_prompt}},
                                      {{"role", "user"}, {"content", request.user_prompt}}})}};
  return body.dump();
}

ClassificationLabel http_classify(const BackendConfig& config, const ChatRequest& request) {
  validate(config);
  std::optional<std::string> token;
  if (config.api_key_env) {
    const char* value = std::getenv(config.api_key_env->c_str());
    if (!value || !*value) throw AuthError("credential variable " + *config.api_key_env + " is not set");
    token = value;
  }
  Endpoint ep = split_url(*config.endpoint_url);
  std::string body = build_chat_body(request);

  std::string last_failure;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(config, attempt - 1));
    try {
      // UnparseableResponse and AuthError propagate without retry.
      return parse_classification(response_text(post_once(config, ep, body, token)));
    } catch (const RetryableFailure& e) {
      last_failure = e.what();
    }
  }
  throw TransportError("giving up after " + std::to_string(config.max_retries + 1) +
                       " attempts: " + last_failure);
}

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) { validate(config_); }

std::vector<ClassificationLabel> batch_classify(const ClassifierBackend& backend, const ValidatedPrompt& validated,
                                                const ModelSpec& model, const LikertMatrix& rows) {
  const std::size_t n = rows.rows.size();
  if (n == 0) throw EmptyInput("no Likert rows to classify", ErrorFamily::Backend);

  std::vector<std::optional<ClassificationLabel>> results(n);
  std::vector<std::optional<std::string>> failures(n);
  std::vector<std::optional<ErrorFamily>> failure_family(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&] {
    while (!failed.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      LikertRowView row = row_view(rows, i);
      ChatRequest req{validated.system_prompt, instantiate_data(validated.user_prompt_template, row_to_text(row)),
                      model};
      try {
        results[i] = backend.classify(req, row);
      } catch (const Error& e) {
        failures[i] = e.what();
        failure_family[i] = e.family();
        failed = true;
      } catch (const std::exception& e) {
        failures[i] = e.what();
        failure_family[i] = ErrorFamily::Backend;
        failed = true;
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(backend.parallelism()), n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // Indices are handed out in increasing order and every claimed index runs
  // to completion, so the lowest recorded failure is the first failing row.
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) throw BatchError(i, Error(*failure_family[i], *failures[i]));
  }
  std::vector<ClassificationLabel> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(*r);
  return out;
}

}  // namespace ciaf
