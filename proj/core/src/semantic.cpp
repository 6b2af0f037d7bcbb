#include "aigikit/semantic.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "aigikit/image_io.hpp"
#include "b64.hpp"

namespace aigikit {

namespace {

using ordered_json = nlohmann::ordered_json;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

// Word-bounded find: the match may not touch alphanumeric neighbors, so
// "inauthentic" does not contain the verdict word "authentic".
std::size_t find_word(const std::string& text, std::string_view word) {
  std::size_t from = 0;
  while (true) {
    const std::size_t pos = text.find(word, from);
    if (pos == std::string::npos) return std::string::npos;
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end >= text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return pos;
    from = pos + 1;
  }
}

}  // namespace

DpoLossResult dpo_loss(std::span<const DpoBatchItem> batch, double beta) {
  if (batch.empty()) throw EmptyBatch("dpo_loss needs a nonempty batch");
  if (!(beta > 0.0)) throw Error("dpo beta must be > 0");

  DpoLossResult result;
  result.grads.resize(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& item = batch[i];
    const double margin = (item.logp_chosen - item.ref_logp_chosen) -
                          (item.logp_rejected - item.ref_logp_rejected);
    const double m = beta * margin;
    total += softplus(-m);  // -log sigmoid(m)

    // d(-log sigmoid(m))/dm = sigmoid(m) - 1.
    const double dm = (sigmoid(m) - 1.0) * inv_n;
    result.grads[i].d_logp_chosen = beta * dm;
    result.grads[i].d_ref_logp_chosen = -beta * dm;
    result.grads[i].d_logp_rejected = -beta * dm;
    result.grads[i].d_ref_logp_rejected = beta * dm;
  }
  result.loss = total * inv_n;
  return result;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Real: return "real";
    case Verdict::Synthetic: return "synthetic";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

Verdict parse_verdict(std::string_view text) {
  const std::string lower = ascii_lower(text);

  // Full prefixes, case-insensitive, trailing period optional; the first
  // occurrence by position wins.
  const std::size_t syn = lower.find("this is an ai-generated image");
  const std::size_t real = lower.find("this is an authentic image");
  if (syn != std::string::npos || real != std::string::npos) {
    if (real == std::string::npos || (syn != std::string::npos && syn < real)) {
      return Verdict::Synthetic;
    }
    return Verdict::Real;
  }

  // Fallback: verdict word inside the first sentence.
  std::size_t sentence_end = lower.find_first_of(".!?");
  if (sentence_end == std::string::npos) sentence_end = lower.size();
  const std::string first_sentence = lower.substr(0, sentence_end);
  const std::size_t w_syn = find_word(first_sentence, "ai-generated");
  const std::size_t w_real = find_word(first_sentence, "authentic");
  if (w_syn == std::string::npos && w_real == std::string::npos) return Verdict::Unknown;
  if (w_real == std::string::npos || (w_syn != std::string::npos && w_syn < w_real)) {
    return Verdict::Synthetic;
  }
  return Verdict::Real;
}

std::string_view to_string(UnknownPolicy p) {
  switch (p) {
    case UnknownPolicy::Real: return "real";
    case UnknownPolicy::Synthetic: return "synthetic";
    case UnknownPolicy::Error: return "error";
  }
  return "real";
}

UnknownPolicy unknown_policy_from_string(std::string_view s) {
  if (s == "real") return UnknownPolicy::Real;
  if (s == "synthetic") return UnknownPolicy::Synthetic;
  if (s == "error") return UnknownPolicy::Error;
  throw Error("unknown unknown-verdict policy: " + std::string(s));
}

BranchVerdict semantic_verdict(const SemanticBackend& backend, const ImageRef& image,
                               const std::string& prompt, UnknownPolicy policy) {
  const std::string text = backend.verdict_text(image, prompt);
  const Verdict v = parse_verdict(text);

  BranchVerdict verdict;
  verdict.branch = BranchKind::Semantic;
  verdict.rationale = text;
  switch (v) {
    case Verdict::Synthetic:
      verdict.score = 1.0;
      verdict.decision = Label::Synthetic;
      break;
    case Verdict::Real:
      verdict.score = 0.0;
      verdict.decision = Label::Real;
      break;
    case Verdict::Unknown:
      verdict.score = 0.5;
      switch (policy) {
        case UnknownPolicy::Real: verdict.decision = Label::Real; break;
        case UnknownPolicy::Synthetic: verdict.decision = Label::Synthetic; break;
        case UnknownPolicy::Error:
          throw UnknownVerdictError("semantic backend produced no parseable verdict for " +
                                    image.id);
      }
      break;
  }
  return verdict;
}

StubBackend::StubBackend(std::map<std::string, std::string> table, std::string default_text)
    : table_(std::move(table)), default_text_(std::move(default_text)) {}

std::string StubBackend::verdict_text(const ImageRef& image, const std::string&) const {
  const auto it = table_.find(image.id);
  return it != table_.end() ? it->second : default_text_;
}

std::map<std::string, std::string> load_stub_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stub fixture: " + path.string());
  std::map<std::string, std::string> table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      table[j.at("image_id").get<std::string>()] = j.at("text").get<std::string>();
    } catch (const std::exception& e) {
      throw Error("stub fixture parse error at line " + std::to_string(line_no) + ": " +
                  e.what());
    }
  }
  return table;
}

HttpVlmBackend::HttpVlmBackend(VlmBackendConfig config) : config_(std::move(config)) {}

std::string HttpVlmBackend::name() const {
  return config_.model_name.empty() ? "vlm" : config_.model_name;
}

std::string HttpVlmBackend::verdict_text(const ImageRef& image, const std::string& prompt) const {
  ordered_json body;
  body["image_b64"] = image.pixels ? detail::base64_encode(encode_png(*image.pixels)) : "";
  body["prompt"] = prompt;
  body["model"] = config_.model_name;
  const std::string payload = body.dump();

  std::string last_error;
  bool timed_out = false;
  const int attempts = std::max(1, config_.retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(0, config_.timeout_ms * 1000);
    client.set_read_timeout(0, config_.timeout_ms * 1000);
    const auto res = client.Post("/verdict", payload, "application/json");
    if (!res) {
      timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                  res.error() == httplib::Error::Read;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      timed_out = false;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      const auto j = ordered_json::parse(res->body);
      return j.at("text").get<std::string>();
    } catch (const std::exception& e) {
      throw MalformedResponse(std::string("vlm backend response: ") + e.what());
    }
  }
  if (timed_out) {
    throw Timeout("vlm backend timed out after " + std::to_string(attempts) + " attempts");
  }
  throw BackendUnavailable("vlm backend unreachable after " + std::to_string(attempts) +
                           " attempts: " + last_error);
}

}  // namespace aigikit
