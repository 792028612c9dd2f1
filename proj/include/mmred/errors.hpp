#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmred {

// Error categories drive the CLI exit-code contract:
//   parse -> 1, precondition -> 2, numerical -> 3.
enum class ErrorKind { parse, precondition, numerical };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct SpectraOverlap : Error {
    explicit SpectraOverlap(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct SingularSystem : Error {
    explicit SingularSystem(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct PoleHit : Error {
    explicit PoleHit(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct IllPosed : Error {
    explicit IllPosed(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct NotObservable : Error {
    explicit NotObservable(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct NotControllable : Error {
    explicit NotControllable(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct Unstable : Error {
    explicit Unstable(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct NotPersistent : Error {
    explicit NotPersistent(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

struct PlacementFailed : Error {
    explicit PlacementFailed(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Stabilization search ran out of budget; carries the best abscissa seen and
// the per-improvement trace as a certificate.
struct BudgetExhausted : Error {
    BudgetExhausted(const std::string& what, double best, std::vector<double> trace)
        : Error(ErrorKind::numerical, what), best_abscissa(best), abscissa_trace(std::move(trace)) {}
    double best_abscissa;
    std::vector<double> abscissa_trace;
};

struct Improper : Error {
    explicit Improper(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct CancellationUnsafe : Error {
    explicit CancellationUnsafe(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

} // namespace mmred
