#pragma once

#include <stdexcept>
#include <string>

namespace dicke {

// Root of every error raised by the library. Each subclass corresponds to one
// failure condition of the model; callers that only care about "something
// went wrong in the physics" can catch this.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// params
class DegenerateDetuning : public Error { public: using Error::Error; };
class OutsideValidity : public Error { public: using Error::Error; };
class SignMismatch : public Error { public: using Error::Error; };
class NegativePower : public Error { public: using Error::Error; };

// hilbert / lindblad
class DimensionMismatch : public Error { public: using Error::Error; };
class TruncationError : public Error { public: using Error::Error; };
class StepSizeUnderflow : public Error { public: using Error::Error; };
class SingularLiouvillian : public Error { public: using Error::Error; };

// meanfield
class NonStationary : public Error { public: using Error::Error; };
class NotDetected : public Error { public: using Error::Error; };

// spectrum
class FitDegenerate : public Error { public: using Error::Error; };

// expcli
class ConfigError : public Error
{
public:
    ConfigError(const std::string& msg, std::string key = {}, int line = 0)
        : Error(format(msg, key, line)), key_(std::move(key)), line_(line)
    {
    }

    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& msg, const std::string& key, int line)
    {
        std::string out;
        if (line > 0)
            out += "line " + std::to_string(line) + ": ";
        if (!key.empty())
            out += "'" + key + "': ";
        return out + msg;
    }

    std::string key_;
    int line_;
};

class CheckFailed : public Error
{
public:
    CheckFailed(const std::string& msg, std::string check_id)
        : Error(msg), check_id_(std::move(check_id))
    {
    }

    const std::string& check_id() const { return check_id_; }

private:
    std::string check_id_;
};

} // namespace dicke
