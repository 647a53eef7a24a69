#pragma once

// Local chat-completions server for transport and LLM policy tests. The
// default responder answers with the first valid action listed in the
// prompt, and with prose every `garbage_every`-th request.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace testing_support {

struct MockReply {
    int status = 200;
    std::string body;
    int delay_ms = 0;
};

inline std::string chat_body(const std::string& content) {
    return nlohmann::json{{"id", "mock"},
                          {"object", "chat.completion"},
                          {"choices", {{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", content}}},
                                        {"finish_reason", "stop"}}}}}
        .dump();
}

// First `{"action": ...}` line after the valid-actions header of the
// original user message.
inline std::string first_valid_action(const nlohmann::json& request) {
    const auto& msgs = request.at("messages");
    std::string user;
    for (const auto& m : msgs) {
        if (m.at("role") == "user") {
            user = m.at("content").get<std::string>();
            break;
        }
    }
    const auto header = user.find("Valid actions");
    const auto open = user.find("{\"action\"", header == std::string::npos ? 0 : header);
    if (open == std::string::npos) return "I am not sure.";
    const auto close = user.find('}', open);
    return user.substr(open, close - open + 1);
}

class MockChatServer {
public:
    using Handler = std::function<MockReply(const nlohmann::json& request, int call_index)>;

    explicit MockChatServer(Handler handler = {}) : handler_(std::move(handler)) {
        server_.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
            const int index = calls_++;
            {
                std::lock_guard lock(mutex_);
                last_authorization_ = req.get_header_value("Authorization");
            }
            const auto body = nlohmann::json::parse(req.body, nullptr, false);
            MockReply reply = handler_ ? handler_(body, index) : default_reply(body, index);
            if (reply.delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(reply.delay_ms));
            res.status = reply.status;
            res.set_content(reply.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockChatServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    MockChatServer(const MockChatServer&) = delete;
    MockChatServer& operator=(const MockChatServer&) = delete;

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int calls() const { return calls_.load(); }
    std::string last_authorization() const {
        std::lock_guard lock(mutex_);
        return last_authorization_;
    }

    int garbage_every = 0;

private:
    MockReply default_reply(const nlohmann::json& request, int index) const {
        if (request.is_discarded()) return {400, R"({"error": "bad json"})"};
        if (garbage_every > 0 && (index + 1) % garbage_every == 0)
            return {200, chat_body("Let me think about which move is best here.")};
        return {200, chat_body(first_valid_action(request))};
    }

    httplib::Server server_;
    Handler handler_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> calls_{0};
    mutable std::mutex mutex_;
    std::string last_authorization_;
};

}  // namespace testing_support
