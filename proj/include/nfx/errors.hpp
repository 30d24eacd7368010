#pragma once

#include <stdexcept>
#include <string>

namespace nfx {

/// Raised when input data violates a documented contract (bad CSV row,
/// dimension mismatch, out-of-range value, ...). Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the forecasting pipeline when every branch has failed and no
/// final forecast can be produced. Carries both branch messages. Maps to
/// CLI exit code 3.
class PipelineError : public std::runtime_error {
public:
    PipelineError(const std::string& dl_error, const std::string& fcm_error)
        : std::runtime_error("all pipeline branches failed (dl: " + dl_error
                             + "; fcm: " + fcm_error + ")"),
          dl_error_(dl_error),
          fcm_error_(fcm_error) {}

    const std::string& dl_error() const noexcept { return dl_error_; }
    const std::string& fcm_error() const noexcept { return fcm_error_; }

private:
    std::string dl_error_;
    std::string fcm_error_;
};

}  // namespace nfx
