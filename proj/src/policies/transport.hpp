#pragma once

// Chat-completion transports: live HTTP, cassette recording and replay.

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"

namespace pokeai::policies {

// Timeouts, dropped connections mid-response, 5xx and 429 replies.
class TransientTransportError : public Error {
public:
    explicit TransientTransportError(const std::string& what) : Error(ErrorCode::Endpoint, what) {}
};

class Transport {
public:
    virtual ~Transport() = default;
    // Sends a chat-completions request body and returns the response body.
    virtual nlohmann::json complete(const nlohmann::json& request) = 0;
};

std::string request_hash(const nlohmann::json& request);

struct LiveOptions {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string api_key;   // sent as a bearer token, never logged
    int timeout_ms = 30000;
    int max_in_flight = 4;
};

class LiveTransport : public Transport {
public:
    explicit LiveTransport(LiveOptions options);
    nlohmann::json complete(const nlohmann::json& request) override;

    // Process-wide count of HTTP requests actually sent.
    static std::uint64_t total_calls() { return calls_.load(); }

private:
    LiveOptions options_;
    std::string host_;  // scheme://host[:port]
    std::string path_;  // .../chat/completions
    std::counting_semaphore<1024> in_flight_;
    static inline std::atomic<std::uint64_t> calls_{0};
};

// Passes requests to `inner` and appends every exchange to the cassette.
// The cassette is truncated when the recorder is created.
class RecordingTransport : public Transport {
public:
    RecordingTransport(std::shared_ptr<Transport> inner, const std::filesystem::path& cassette);
    nlohmann::json complete(const nlohmann::json& request) override;

private:
    std::shared_ptr<Transport> inner_;
    std::filesystem::path cassette_;
    std::mutex write_mutex_;
    std::ofstream out_;
};

// Serves recorded responses by request hash, oldest first for repeats.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(const std::filesystem::path& cassette);
    nlohmann::json complete(const nlohmann::json& request) override;

    std::size_t remaining() const;

private:
    struct Entry {
        nlohmann::json response;
        std::string error;
    };
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<Entry>> entries_;
};

enum class TransportMode { Live, Record, Replay };

std::string_view mode_name(TransportMode mode);
std::optional<TransportMode> parse_mode(std::string_view name);

std::shared_ptr<Transport> make_transport(TransportMode mode, const std::filesystem::path& cassette,
                                          const LiveOptions& live);

}  // namespace pokeai::policies
