#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace onetrace {

// Stable error identifiers; the code string is part of the tool's contract
// (surfaced through the C API and the CLI), the message is for humans.
struct Error {
    std::string code;
    std::string message;
    std::optional<uint64_t> offset;  // byte position in the offending input, when known

    std::string describe() const {
        std::string s = code;
        if (!message.empty()) {
            s += ": ";
            s += message;
        }
        if (offset) {
            s += " (at byte ";
            s += std::to_string(*offset);
            s += ")";
        }
        return s;
    }
};

inline Error make_error(std::string code, std::string message,
                        std::optional<uint64_t> offset = std::nullopt) {
    return Error{std::move(code), std::move(message), offset};
}

template <typename T>
class Result {
public:
    Result(T value) : value_(std::move(value)) {}
    Result(Error err) : value_(std::move(err)) {}

    bool ok() const { return std::holds_alternative<T>(value_); }
    explicit operator bool() const { return ok(); }

    T& value() { return std::get<T>(value_); }
    const T& value() const { return std::get<T>(value_); }
    const Error& error() const { return std::get<Error>(value_); }

    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, Error> value_;
};

template <>
class Result<void> {
public:
    Result() = default;
    Result(Error err) : err_(std::move(err)) {}

    bool ok() const { return !err_.has_value(); }
    explicit operator bool() const { return ok(); }
    const Error& error() const { return *err_; }

private:
    std::optional<Error> err_;
};

}  // namespace onetrace
