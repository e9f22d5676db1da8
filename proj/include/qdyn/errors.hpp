#pragma once

#include <stdexcept>
#include <string>

namespace qdyn {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct GridMismatch : Error {
    using Error::Error;
};
struct NegativeWeight : Error {
    using Error::Error;
};
struct NegativeRate : Error {
    using Error::Error;
};
struct NonHermitianH : Error {
    using Error::Error;
};
struct NonHermitianChoi : Error {
    using Error::Error;
};
struct SingularDeconvolution : Error {
    using Error::Error;
};
struct SingularMap : Error {
    using Error::Error;
};
struct ChannelNotCPTP : Error {
    using Error::Error;
};
struct TailTooHeavy : Error {
    using Error::Error;
};
struct UnknownModel : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};

} // namespace qdyn
