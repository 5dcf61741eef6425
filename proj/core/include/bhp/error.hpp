#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bhp {

enum class ErrorKind {
  parameter,                ///< an argument is outside its domain
  configuration,            ///< a simulation setup cannot deliver the requested quantity
  contract,                 ///< caller broke a documented precondition
  no_giant,                 ///< no component qualifies as the giant proxy
  supercritical_divergence, ///< full-cluster Palm size requested while a giant exists
  not_supercritical,        ///< too few replicates saw a giant component
  enlarge_box,              ///< a bad component touched the analysis box
  lambda_too_small,         ///< renormalization scale falls outside (0, 1/d)
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::contract: return "contract error";
    case ErrorKind::no_giant: return "no-giant";
    case ErrorKind::supercritical_divergence: return "supercritical-divergence";
    case ErrorKind::not_supercritical: return "not-supercritical";
    case ErrorKind::enlarge_box: return "enlarge box";
    case ErrorKind::lambda_too_small: return "lambda too small for renormalization";
  }
  return "error";
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

}  // namespace bhp
