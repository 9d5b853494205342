/**
 * @file cli.hpp
 * @brief Command-line front end of spectra-shrink.
 *
 * Exit codes: 0 success, 1 verification failure, 2 invalid spec or usage,
 * 3 I/O failure.
 */

#pragma once

#include <ostream>

namespace spectra
{

    inline constexpr int kExitOk = 0;
    inline constexpr int kExitVerifyFailed = 1;
    inline constexpr int kExitInvalidSpec = 2;
    inline constexpr int kExitIo = 3;

    /// Parses and runs one command. Never throws; errors become exit codes.
    int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace spectra
