#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ergolab {

// Error carrying a stable machine-readable token alongside the human message.
// Tokens are the short kebab-case codes quoted in reports and CLI output
// ("degenerate-simplex", "boundary-hit", ...). Checks that merely fail do not
// throw; throwing is reserved for contract violations and unusable inputs.
class Error : public std::runtime_error {
public:
    Error(std::string token, const std::string& message)
        : std::runtime_error(token + ": " + message), token_(std::move(token)) {}

    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

[[noreturn]] inline void fail(const std::string& token, const std::string& message) {
    throw Error(token, message);
}

inline void require(bool cond, const std::string& token, const std::string& message) {
    if (!cond) fail(token, message);
}

}  // namespace ergolab
