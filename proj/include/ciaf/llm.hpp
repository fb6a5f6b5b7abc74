#pragma once

#include "ciaf/label.hpp"
#include "ciaf/ontology.hpp"
#include "ciaf/promptshield.hpp"
#include "ciaf/transform.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf {

struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  ModelSpec model;
};

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::optional<std::string> endpoint_url;
  /// Name of the environment variable holding the bearer credential.
  std::optional<std::string> api_key_env;
  std::chrono::milliseconds timeout{30'000};
  int max_retries = 3;
  int parallelism = 1;
  std::chrono::milliseconds backoff_base{1'000};
  double backoff_factor = 2.0;
};

/// Throws std::invalid_argument for an http config without endpoint, or
/// parallelism < 1, or negative retries.
void validate(const BackendConfig& config);

/// True when `cell` satisfies the predicate under the cell's scheme. Throws
/// an Analysis-family Error when the predicate level does not exist there.
bool predicate_holds(const RulePredicate& predicate, const LikertLevel& cell);

/// Malicious iff every predicate holds. Throws MissingFeature when a rule
/// feature has no column in the row.
ClassificationLabel mock_classify(const std::vector<RulePredicate>& rule, const LikertRowView& row);

/// First label word in the text, case-insensitive: normal/legit or
/// ransomware/malicious. Throws UnparseableResponse when there is none.
ClassificationLabel parse_classification(std::string_view text);

/// JSON body for a chat-completion request.
std::string build_chat_body(const ChatRequest& request);

/// POSTs to the configured endpoint with retries on transport failures.
/// Throws TransportError, AuthError, or UnparseableResponse.
ClassificationLabel http_classify(const BackendConfig& config, const ChatRequest& request);

class ClassifierBackend {
 public:
  virtual ~ClassifierBackend() = default;
  virtual ClassificationLabel classify(const ChatRequest& request, const LikertRowView& row) const = 0;
  virtual int parallelism() const = 0;
};

/// Offline backend: evaluates the scenario's declarative detection rule.
class MockBackend final : public ClassifierBackend {
 public:
  explicit MockBackend(std::vector<RulePredicate> rule, int parallelism = 1)
      : rule_(std::move(rule)), parallelism_(parallelism < 1 ? 1 : parallelism) {}

  ClassificationLabel classify(const ChatRequest&, const LikertRowView& row) const override {
    return mock_classify(rule_, row);
  }
  int parallelism() const override { return parallelism_; }

 private:
  std::vector<RulePredicate> rule_;
  int parallelism_;
};

class HttpBackend final : public ClassifierBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  ClassificationLabel classify(const ChatRequest& request, const LikertRowView&) const override {
    return http_classify(config_, request);
  }
  int parallelism() const override { return config_.parallelism; }

 private:
  BackendConfig config_;
};

/// Classifies each row with `{data}` bound to row_to_text(row). Results keep
/// row order at any parallelism. The first failing row (lowest index) aborts
/// the batch with BatchError. Throws EmptyInput for zero rows.
std::vector<ClassificationLabel> batch_classify(const ClassifierBackend& backend, const ValidatedPrompt& validated,
                                                const ModelSpec& model, const LikertMatrix& rows);

}  // namespace ciaf
