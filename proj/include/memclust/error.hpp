#pragma once

#include <stdexcept>
#include <string>

namespace memclust {

/// Exception carrying a stable machine-readable code such as "shape-mismatch"
/// alongside a human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    explicit Error(std::string code) : std::runtime_error(code), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* empty_memory_set = "empty-memory-set";
inline constexpr const char* shape_mismatch = "shape-mismatch";
inline constexpr const char* empty_input = "empty-input";
inline constexpr const char* empty_corpus = "empty-corpus";
inline constexpr const char* unknown_document = "unknown-document";
inline constexpr const char* bridge_unavailable = "bridge-unavailable";
inline constexpr const char* bridge_protocol_violation = "bridge-protocol-violation";
inline constexpr const char* duplicate_id = "duplicate-id";
inline constexpr const char* malformed_dataset = "malformed-dataset";
inline constexpr const char* invalid_argument = "invalid-argument";
inline constexpr const char* io_error = "io-error";
inline constexpr const char* format_error = "format-error";
}  // namespace errc

}  // namespace memclust
