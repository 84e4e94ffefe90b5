// Copyright (c) 2026 the qpp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace qpp {

inline constexpr const char* kVersion = "0.1.0";

// Unit convention used throughout: every frequency-type quantity (Omega, Delta,
// k prefactors, E_C) is stored as a cyclic frequency in GHz; the dynamics layer
// converts to angular units by 2*pi rad/ns (hbar = 1). Time is in ns.
inline constexpr const char* kUnitsNote =
    "frequencies in GHz (cyclic), converted to angular 2*pi rad/ns in the "
    "equations of motion (hbar=1); time in ns";

} // namespace qpp
