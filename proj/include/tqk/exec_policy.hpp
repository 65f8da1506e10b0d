#pragma once

namespace tqk {

// Selects the loop implementation for the bulk kernels. kSerial is the
// reference path the OpenMP path is tested against.
enum class ExecPolicy { kSerial, kParallel };

}  // namespace tqk
