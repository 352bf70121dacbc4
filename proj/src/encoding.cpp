#include "memclust/encoding.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "memclust/retrieval.hpp"

extern char** environ;

namespace memclust {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) noexcept {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= 0x100000001b3ULL;
    }
    return state;
}

namespace {

void add_feature(std::vector<double>& row, std::uint64_t h) {
    const auto bucket = static_cast<std::size_t>(h % row.size());
    row[bucket] += (h >> 63) ? -1.0 : 1.0;
}

}  // namespace

MemoryTokens reference_encode(const Document& doc, std::size_t d_m, std::size_t d_e) {
    if (d_m < 1 || d_e < 1) throw Error(errc::invalid_argument, "d_m and d_e must be >= 1");
    const auto tokens = tokenize(doc.text);
    const std::size_t base = tokens.size() / d_m;
    const std::size_t extra = tokens.size() % d_m;

    Matrix out(d_m, d_e);
    std::vector<double> row(d_e);
    std::size_t pos = 0;
    for (std::size_t r = 0; r < d_m; ++r) {
        const std::size_t len = base + (r < extra ? 1 : 0);
        if (len == 0) continue;
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = pos; i < pos + len; ++i) {
            add_feature(row, fnv1a64(tokens[i]));
            if (i + 1 < pos + len) {
                std::string bigram = tokens[i];
                bigram.push_back('\x1f');
                bigram += tokens[i + 1];
                add_feature(row, fnv1a64(bigram));
            }
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(len));
        auto dst = out.row(r);
        for (std::size_t c = 0; c < d_e; ++c) dst[c] = static_cast<float>(row[c] * scale);
        pos += len;
    }
    return MemoryTokens(doc.id, std::move(out));
}

void EncoderSpec::validate() const {
    if (d_m < 1 || d_e < 1) throw Error(errc::invalid_argument, "encoder d_m and d_e must be >= 1");
    if (kind == EncoderKind::bridge && (!bridge_endpoint || bridge_endpoint->empty())) {
        throw Error(errc::invalid_argument, "bridge encoder requires a bridge command");
    }
    if (kind == EncoderKind::reference && bridge_endpoint) {
        throw Error(errc::invalid_argument, "reference encoder takes no bridge command");
    }
}

// ---------------------------------------------------------------------------
// BridgeSession

BridgeSession::BridgeSession(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0) throw Error(errc::bridge_unavailable, std::strerror(errno));
    if (pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw Error(errc::bridge_unavailable, std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
    posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

    std::string sh = "/bin/sh";
    std::string flag = "-c";
    std::string cmd = command;
    char* argv[] = {sh.data(), flag.data(), cmd.data(), nullptr};
    pid_t pid = -1;
    const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (rc != 0) {
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        throw Error(errc::bridge_unavailable, std::string("spawn failed: ") + std::strerror(rc));
    }
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    try {
        const auto reply = json::parse(round_trip(R"({"type":"hello"})"));
        if (reply.value("type", "") != "hello" || !reply.contains("d_e")) {
            throw Error(errc::bridge_protocol_violation, "bad hello reply: " + reply.dump());
        }
        model_ = reply.value("model", "");
        const auto d_e = reply.at("d_e").get<long long>();
        if (d_e < 1) throw Error(errc::bridge_protocol_violation, "hello declared d_e < 1");
        d_e_ = static_cast<std::size_t>(d_e);
    } catch (const json::exception& e) {
        close_process();
        throw Error(errc::bridge_protocol_violation, std::string("hello: ") + e.what());
    } catch (...) {
        close_process();
        throw;
    }
}

BridgeSession::~BridgeSession() { close_process(); }

void BridgeSession::close_process() noexcept {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

std::string BridgeSession::round_trip(const std::string& line) {
    if (to_child_ < 0) throw Error(errc::bridge_unavailable, "bridge session is closed");
    std::string msg = line + "\n";
    std::size_t written = 0;
    while (written < msg.size()) {
        const auto n = ::write(to_child_, msg.data() + written, msg.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(errc::bridge_unavailable, std::string("write failed: ") + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string reply = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return reply;
        }
        char chunk[65536];
        const auto n = ::read(from_child_, chunk, sizeof(chunk));
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw Error(errc::bridge_unavailable, "bridge closed its output stream");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string BridgeSession::exchange_raw(const std::string& line) {
    std::lock_guard lock(mutex_);
    return round_trip(line);
}

namespace {

json parse_reply(const std::string& line, const std::string& id, const char* expected_type) {
    json reply;
    try {
        reply = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(errc::bridge_protocol_violation, std::string("unparsable reply: ") + e.what());
    }
    const auto type = reply.value("type", "");
    if (type == "error") {
        throw Error(kBridgeError, "bridge reported for '" + id + "': " + reply.value("message", ""));
    }
    if (type != expected_type) {
        throw Error(errc::bridge_protocol_violation, "expected '" + std::string(expected_type) + "' frame, got '" + type + "'");
    }
    if (!reply.contains("id") || reply.at("id") != id) {
        throw Error(errc::bridge_protocol_violation, "reply id does not match request '" + id + "'");
    }
    return reply;
}

}  // namespace

Matrix BridgeSession::encode(const std::string& id, const std::string& text, std::size_t d_m) {
    json req = {{"type", "encode"}, {"id", id}, {"text", text}, {"d_m", d_m}};
    std::lock_guard lock(mutex_);
    const auto reply = parse_reply(round_trip(req.dump()), id, "memory");
    const auto& rows = reply.at("tokens");
    if (!rows.is_array() || rows.size() != d_m) {
        throw Error(errc::bridge_protocol_violation, "encode returned wrong row count for '" + id + "'");
    }
    Matrix out(d_m, d_e_);
    for (std::size_t r = 0; r < d_m; ++r) {
        const auto& row = rows[r];
        if (!row.is_array() || row.size() != d_e_) {
            throw Error(errc::bridge_protocol_violation, "encode row " + std::to_string(r) + " has wrong width");
        }
        for (std::size_t c = 0; c < d_e_; ++c) {
            if (!row[c].is_number()) throw Error(errc::bridge_protocol_violation, "non-numeric token value");
            const double v = row[c].get<double>();
            if (!std::isfinite(v)) throw Error(errc::bridge_protocol_violation, "non-finite token value");
            out.at(r, c) = static_cast<float>(v);
        }
    }
    return out;
}

std::string BridgeSession::generate(const std::string& id, const std::string& instruction, const Matrix& memory) {
    json rows = json::array();
    for (std::size_t r = 0; r < memory.rows(); ++r) {
        auto row = memory.row(r);
        rows.push_back(std::vector<float>(row.begin(), row.end()));
    }
    json req = {{"type", "generate"}, {"id", id}, {"instruction", instruction}, {"memory", rows}};
    std::lock_guard lock(mutex_);
    const auto reply = parse_reply(round_trip(req.dump()), id, "text");
    if (!reply.contains("text") || !reply.at("text").is_string()) {
        throw Error(errc::bridge_protocol_violation, "text frame without text");
    }
    return reply.at("text").get<std::string>();
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(EncoderSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.kind == EncoderKind::bridge) {
        session_ = std::make_shared<BridgeSession>(*spec_.bridge_endpoint);
        if (!spec_.model_name) spec_.model_name = session_->model();
    }
}

std::size_t Encoder::d_e() const noexcept { return session_ ? session_->d_e() : spec_.d_e; }

MemoryTokens Encoder::encode(const Document& doc, std::size_t d_m) const {
    doc.validate();
    if (spec_.kind == EncoderKind::reference) return reference_encode(doc, d_m, spec_.d_e);
    return MemoryTokens(doc.id, session_->encode(doc.id, doc.text, d_m));
}

std::vector<MemoryTokens> Encoder::encode_profile(std::span<const Document> docs, std::size_t d_m) const {
    std::vector<MemoryTokens> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        try {
            out.push_back(encode(d, d_m));
        } catch (const Error& e) {
            throw Error(e.code(), "encoding document '" + d.id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace memclust
