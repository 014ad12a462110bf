#pragma once

#include <stdexcept>
#include <string>

namespace evt {

// Input files, CSV schemas, malformed JSON.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Nonconvergence, infeasible decompositions, exhausted retry budgets.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace evt
