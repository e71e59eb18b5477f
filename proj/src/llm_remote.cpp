#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "route/llm.hpp"

namespace route {

namespace {

/// Splits "scheme://host[:port]/base" into the host part and the base path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw std::invalid_argument("endpoint must start with http:// or https://");
    auto slash = endpoint.find('/', scheme + 3);
    std::string host = endpoint.substr(0, slash);
    std::string base = slash == std::string::npos ? std::string() : endpoint.substr(slash);
    while (!base.empty() && base.back() == '/') base.pop_back();
    return {host, base};
}

class SlotGuard {
  public:
    explicit SlotGuard(std::counting_semaphore<4096>& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

  private:
    std::counting_semaphore<4096>& s_;
};

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.parallelism, 1, 4096))) {
    if (config_.endpoint.empty()) throw std::invalid_argument("remote backend needs an endpoint");
    if (config_.model.empty()) throw std::invalid_argument("remote backend needs a model id");
    if (config_.max_attempts < 1) config_.max_attempts = 1;
    std::tie(host_, path_) = split_endpoint(config_.endpoint);
    path_ += "/chat/completions";
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }
}

std::string RemoteBackend::request_body(const std::string& model, const PromptText& prompt,
                                        const GenerationParams& params) {
    nlohmann::ordered_json body;
    body["model"] = model;
    body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt.text}}});
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    if (!params.stop.empty()) body["stop"] = params.stop;
    return body.dump();
}

std::string RemoteBackend::complete(const PromptText& prompt, const GenerationParams& params) {
    params.validate();
    const std::string body = request_body(config_.model, prompt, params);
    SlotGuard slot(slots_);

    httplib::Client client(host_);
    client.set_connection_timeout(10);
    client.set_read_timeout(config_.request_timeout_s);
    client.set_write_timeout(30);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string last_error;
    int backoff = config_.initial_backoff_ms;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw BackendError("HTTP " + std::to_string(res->status) + " from " + config_.endpoint + ": " +
                               res->body.substr(0, 500));
        } else {
            try {
                auto j = nlohmann::json::parse(res->body);
                const auto& content = j.at("choices").at(0).at("message").at("content");
                return content.is_null() ? std::string() : content.get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw BackendError(std::string("malformed completion response: ") + e.what());
            }
        }
        spdlog::warn("pair {} {} attempt {}/{} failed: {}", prompt.meta.pair_id, to_string(prompt.task), attempt,
                     config_.max_attempts, last_error);
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff = std::min(backoff * 2, config_.max_backoff_ms);
        }
    }
    throw BackendError("completion failed after " + std::to_string(config_.max_attempts) +
                       " attempts: " + last_error);
}

}  // namespace route
