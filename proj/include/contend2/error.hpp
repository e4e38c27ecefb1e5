#pragma once

#include <stdexcept>
#include <string>

namespace contend2 {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a type invariant (bad probability vector, bad flag value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// 1 - sum (m_{k-1} - m_k)^2 vanished: the policy collides forever.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

class NonAbsorbing : public Error {
 public:
  using Error::Error;
};

class NoSignChange : public Error {
 public:
  using Error::Error;
};

class NonMonotone : public Error {
 public:
  using Error::Error;
};

// A history no running device can hold was handed to a recurrent policy.
class UnreachableState : public Error {
 public:
  using Error::Error;
};

// Monte Carlo trial left a device without a success inside the horizon.
class HorizonExhausted : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

}  // namespace contend2
