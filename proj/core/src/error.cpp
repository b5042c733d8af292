// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/error.hpp"

namespace prosg {

int exit_code_for(const Error& error) noexcept {
  switch (error.category()) {
    case Error::Category::Argument:
      return 1;
    case Error::Category::Data:
      return 2;
    case Error::Category::Numeric:
      return 3;
  }
  return 3;
}

}  // namespace prosg
