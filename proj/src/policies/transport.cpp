#include "policies/transport.hpp"

#include <httplib.h>

#include "common/clock.hpp"
#include "common/hash.hpp"

namespace pokeai::policies {

using nlohmann::json;

std::string request_hash(const json& request) { return sha256_hex(request.dump()); }

LiveTransport::LiveTransport(LiveOptions options)
    : options_(std::move(options)), in_flight_(std::max(1, std::min(options_.max_in_flight, 1024))) {
    if (options_.base_url.empty()) throw Error(ErrorCode::InvalidArgument, "chat endpoint base URL is empty");
    if (options_.timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "timeout_ms must be positive");
    const auto scheme = options_.base_url.find("://");
    if (scheme == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "chat endpoint URL needs a scheme: " + options_.base_url);
    const auto slash = options_.base_url.find('/', scheme + 3);
    host_ = options_.base_url.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : options_.base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
}

json LiveTransport::complete(const json& request) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    httplib::Client client(host_);
    const auto secs = options_.timeout_ms / 1000;
    const auto usecs = (options_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    ++calls_;
    const auto res = client.Post(path_, headers, request.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout || err == httplib::Error::Write)
            throw TransientTransportError("chat endpoint timed out (" + httplib::to_string(err) + ")");
        throw Error(ErrorCode::Endpoint, "chat endpoint " + host_ + " unreachable: " + httplib::to_string(err));
    }
    if (res->status == 429 || res->status >= 500)
        throw TransientTransportError("chat endpoint returned HTTP " + std::to_string(res->status));
    if (res->status >= 400)
        throw Error(ErrorCode::Endpoint, "chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                             res->body.substr(0, 200));
    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded()) throw Error(ErrorCode::Endpoint, "chat endpoint returned a non-JSON body");
    return body;
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner, const std::filesystem::path& cassette)
    : inner_(std::move(inner)), cassette_(cassette) {
    if (cassette.has_parent_path()) std::filesystem::create_directories(cassette.parent_path());
    out_.open(cassette, std::ios::trunc);
    if (!out_) throw IoError("cannot open cassette for writing: " + cassette.string());
}

json RecordingTransport::complete(const json& request) {
    json line = {{"request_hash", request_hash(request)}, {"request", request}};
    json response;
    try {
        response = inner_->complete(request);
        line["response"] = response;
    } catch (const TransientTransportError& e) {
        line["response"] = nullptr;
        line["error"] = e.what();
        line["timestamp"] = utc_timestamp();
        std::lock_guard lock(write_mutex_);
        out_ << line.dump() << "\n" << std::flush;
        throw;
    }
    line["timestamp"] = utc_timestamp();
    std::lock_guard lock(write_mutex_);
    out_ << line.dump() << "\n" << std::flush;
    if (!out_) throw IoError("cannot append to cassette " + cassette_.string());
    return response;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& cassette) {
    std::ifstream in(cassette);
    if (!in) throw IoError("cannot read cassette " + cassette.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("request_hash") || !j.contains("response"))
            throw DataError(cassette.filename().string() + ":" + std::to_string(lineno) + ": malformed cassette line");
        Entry e{j["response"], j.value("error", std::string())};
        entries_[j["request_hash"].get<std::string>()].push_back(std::move(e));
    }
}

json ReplayTransport::complete(const json& request) {
    const std::string hash = request_hash(request);
    Entry e;
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(hash);
        if (it == entries_.end() || it->second.empty())
            throw Error(ErrorCode::ReplayMiss, "cassette has no recorded response for request hash " + hash);
        e = std::move(it->second.front());
        it->second.pop_front();
    }
    if (!e.error.empty()) throw TransientTransportError(e.error);
    return e.response;
}

std::size_t ReplayTransport::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [hash, q] : entries_) n += q.size();
    return n;
}

std::string_view mode_name(TransportMode mode) {
    switch (mode) {
        case TransportMode::Live: return "live";
        case TransportMode::Record: return "record";
        case TransportMode::Replay: return "replay";
    }
    return "live";
}

std::optional<TransportMode> parse_mode(std::string_view name) {
    if (name == "live") return TransportMode::Live;
    if (name == "record") return TransportMode::Record;
    if (name == "replay") return TransportMode::Replay;
    return std::nullopt;
}

std::shared_ptr<Transport> make_transport(TransportMode mode, const std::filesystem::path& cassette,
                                          const LiveOptions& live) {
    switch (mode) {
        case TransportMode::Live: return std::make_shared<LiveTransport>(live);
        case TransportMode::Record:
            return std::make_shared<RecordingTransport>(std::make_shared<LiveTransport>(live), cassette);
        case TransportMode::Replay: return std::make_shared<ReplayTransport>(cassette);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown transport mode");
}

}  // namespace pokeai::policies
