#ifndef OPL1_ERROR_HPP_
#define OPL1_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace opl1
{

// precondition violated by the caller: wrong structure, non-Hermitian, non-PSD, bad parameter
class invalid_input : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// a computed quantity contradicts an identity the library certifies
class invariant_violation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// an iterative search or index scan ran out of budget
class budget_exhausted : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// eigensolver failed to converge
class numerical_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// file could not be read or written
class io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}  // namespace opl1

#endif
