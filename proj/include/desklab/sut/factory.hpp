#pragma once

#include "desklab/harness/service.hpp"

namespace desklab::sut {

/// Implementations for every ServiceKind.
harness::ServiceFactory builtin_factory();

}  // namespace desklab::sut
