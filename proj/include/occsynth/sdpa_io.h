#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "occsynth/sdp.h"

namespace occsynth {

/// Parse failure with a 1-based line and column.
class SdpaParseError : public std::runtime_error {
 public:
  SdpaParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorts entries by (block, row, col), merges duplicates and drops zeros.
/// The writer emits programs in this form.
ConicProgram canonicalize(const ConicProgram& program);

/// Sparse SDPA (.dat-s): mDIM, nBLOCK, block sizes, rhs, then quintuples
/// "matno blkno i j value" with 1-based indices, objective as matno 0.
void write_sdpa(const ConicProgram& program, std::ostream& out);
void write_sdpa(const ConicProgram& program, const std::filesystem::path& path);

/// Accepts leading comment lines (starting with '"' or '*') and the usual
/// separator characters ",(){}" between numbers.
ConicProgram read_sdpa(std::istream& in);
ConicProgram read_sdpa(const std::filesystem::path& path);

/// Writes a solution in the SDPA output convention. SDPA's primal variable
/// vector is our y (xVec), its primal slack our S (xMat) and its dual matrix
/// our X (yMat); objValPrimal is b'y and objValDual is <C, X>.
void write_sdpa_solution(const SdpSolution& solution, std::ostream& out);

/// Reads either the SDPA output convention above or the plain variant:
///
///   y v_1 ... v_m
///   X b entries...
///   S b entries...
///
/// where b is a 1-based block number and the entries list the block's upper
/// triangle row by row (a diagonal block lists its diagonal). Lines starting
/// with '"' or '*' are comments. Objectives and residuals are recomputed
/// against `program`.
SdpSolution read_sdpa_solution(std::istream& in, const ConicProgram& program);
SdpSolution read_sdpa_solution(const std::filesystem::path& path,
                               const ConicProgram& program);

}  // namespace occsynth
