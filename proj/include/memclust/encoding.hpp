#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memclust/core.hpp"

namespace memclust {

inline constexpr const char* kBridgeError = "bridge-error";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

/// Deterministic feature-hashing stand-in for the trained compressor.
///
/// The token sequence is cut into d_m contiguous chunks (the first
/// len % d_m chunks hold one extra token; trailing chunks may be empty).
/// Each unigram and each in-chunk bigram (bytes joined by 0x1F) is hashed with
/// FNV-1a; it adds +1 or -1 (top hash bit set => -1) to bucket h % d_e.
/// The row is then scaled by 1/sqrt(max(1, chunk token count)).
MemoryTokens reference_encode(const Document& doc, std::size_t d_m, std::size_t d_e);

enum class EncoderKind { reference, bridge };

struct EncoderSpec {
    EncoderKind kind = EncoderKind::reference;
    std::size_t d_m = 128;
    std::size_t d_e = 2048;
    std::optional<std::string> bridge_endpoint;
    std::optional<std::string> model_name;

    void validate() const;
};

/// One child process speaking newline-delimited JSON on stdin/stdout.
/// Calls are serialized internally; share one session across threads or
/// open several.
class BridgeSession {
public:
    /// Spawns `/bin/sh -c command` and performs the hello handshake.
    /// Throws bridge-unavailable when the process cannot be started or does
    /// not answer the handshake.
    explicit BridgeSession(const std::string& command);
    ~BridgeSession();

    BridgeSession(const BridgeSession&) = delete;
    BridgeSession& operator=(const BridgeSession&) = delete;

    const std::string& model() const noexcept { return model_; }
    std::size_t d_e() const noexcept { return d_e_; }

    /// Returns exactly d_m x d_e() tokens or throws bridge-protocol-violation.
    Matrix encode(const std::string& id, const std::string& text, std::size_t d_m);
    std::string generate(const std::string& id, const std::string& instruction, const Matrix& memory);

    /// Sends one raw line and returns the raw reply line. Test hook.
    std::string exchange_raw(const std::string& line);

private:
    std::string round_trip(const std::string& line);
    void close_process() noexcept;

    std::mutex mutex_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    std::string model_;
    std::size_t d_e_ = 0;
};

class Encoder {
public:
    explicit Encoder(EncoderSpec spec);

    const EncoderSpec& spec() const noexcept { return spec_; }
    /// Embedding width actually produced (the bridge's declared width for bridge kind).
    std::size_t d_e() const noexcept;

    MemoryTokens encode(const Document& doc) const { return encode(doc, spec_.d_m); }
    MemoryTokens encode(const Document& doc, std::size_t d_m) const;

    /// Element i = encode(docs[i]). Errors carry the failing doc id.
    std::vector<MemoryTokens> encode_profile(std::span<const Document> docs, std::size_t d_m) const;

    std::shared_ptr<BridgeSession> session() const noexcept { return session_; }

private:
    EncoderSpec spec_;
    std::shared_ptr<BridgeSession> session_;
};

}  // namespace memclust
