#include "sonilab/error.hpp"

namespace sonilab {

Error::Error(ErrorKind kind, std::string code, const std::string& message)
    : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

void throw_data(const std::string& code, const std::string& message) {
  throw Error(ErrorKind::Data, code, message);
}

void throw_usage(const std::string& code, const std::string& message) {
  throw Error(ErrorKind::Usage, code, message);
}

void throw_numeric(const std::string& code, const std::string& message) {
  throw Error(ErrorKind::Numeric, code, message);
}

}  // namespace sonilab
