#include "occsynth/sdpa_io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>

#include "occsynth/polynomial.h"

namespace occsynth {

SdpaParseError::SdpaParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

SparseMatrixEntries canonical_entries(const SparseMatrixEntries& entries) {
  std::map<std::tuple<int, int, int>, double> merged;
  for (const auto& e : entries) merged[{e.block, e.row, e.col}] += e.value;
  SparseMatrixEntries out;
  for (const auto& [key, v] : merged) {
    if (v != 0.0) out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
  }
  return out;
}

std::string read_all(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool is_comment_line(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos != std::string::npos && (line[pos] == '"' || line[pos] == '*');
}

struct Token {
  std::string text;
  int line;
  int column;
};

// Whitespace-and-separator tokenizer for the .dat-s body.
std::vector<Token> tokenize_dat(const std::string& text) {
  std::vector<Token> tokens;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && is_comment_line(line)) continue;
    header = false;
    std::size_t k = 0;
    while (k < line.size()) {
      const char c = line[k];
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')' ||
          c == '{' || c == '}') {
        ++k;
        continue;
      }
      const std::size_t start = k;
      while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) &&
             line[k] != ',' && line[k] != '(' && line[k] != ')' && line[k] != '{' &&
             line[k] != '}') {
        ++k;
      }
      tokens.push_back({line.substr(start, k - start), line_no, static_cast<int>(start) + 1});
    }
  }
  return tokens;
}

double parse_double(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw SdpaParseError(t.line, t.column, "expected a number, found '" + t.text + "'");
  }
  return v;
}

int parse_int(const Token& t) {
  const double v = parse_double(t);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw SdpaParseError(t.line, t.column, "expected an integer, found '" + t.text + "'");
  }
  return static_cast<int>(v);
}

void emit_entry(std::ostream& out, int matno, const SparseEntry& e) {
  out << matno << ' ' << (e.block + 1) << ' ' << (e.row + 1) << ' ' << (e.col + 1) << ' '
      << format_double(e.value) << '\n';
}

// Character cursor for the brace-structured SDPA output format.
class Cursor {
 public:
  explicit Cursor(const std::string& text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  int line() const { return line_; }
  int column() const { return col_; }
  std::size_t pos() const { return pos_; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SdpaParseError(line_, col_, message);
  }

  double number(const std::string& section) {
    skip_space();
    if (at_end()) fail("unexpected end of input in section " + section);
    const std::size_t start = pos_;
    const int l = line_, c = col_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                         peek() == '-' || peek() == '+')) {
      advance();
    }
    Token t{text_.substr(start, pos_ - start), l, c};
    if (t.text.empty()) fail("expected a number in section " + section);
    return parse_double(t);
  }

  void expect(char ch, const std::string& section) {
    skip_space();
    if (at_end()) fail("unexpected end of input in section " + section);
    if (peek() != ch) {
      fail(std::string("expected '") + ch + "' in section " + section + ", found '" + peek() +
           "'");
    }
    advance();
  }

  // Moves to the first line that starts with `key` followed by '='; returns
  // false if there is none.
  bool seek_key(const std::string& key) {
    while (!at_end()) {
      skip_space();
      if (at_end()) break;
      if (col_ == 1 || line_start_blank()) {
        if (text_.compare(pos_, key.size(), key) == 0) {
          std::size_t k = pos_ + key.size();
          while (k < text_.size() && (text_[k] == ' ' || text_[k] == '\t')) ++k;
          if (k < text_.size() && text_[k] == '=') {
            while (pos_ <= k) advance();
            return true;
          }
        }
      }
      while (!at_end() && peek() != '\n') advance();
    }
    return false;
  }

 private:
  bool line_start_blank() const {
    std::size_t k = pos_;
    while (k > 0 && text_[k - 1] != '\n') {
      if (!std::isspace(static_cast<unsigned char>(text_[k - 1]))) return false;
      --k;
    }
    return true;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// { a, b, ... }
std::vector<double> read_vector(Cursor& cur, const std::string& section) {
  std::vector<double> out;
  cur.expect('{', section);
  cur.skip_space();
  if (cur.peek() == '}') {
    cur.advance();
    return out;
  }
  for (;;) {
    out.push_back(cur.number(section));
    cur.skip_space();
    if (cur.at_end()) cur.fail("unexpected end of input in section " + section);
    if (cur.peek() == ',') {
      cur.advance();
      continue;
    }
    cur.expect('}', section);
    return out;
  }
}

// { block block ... } where a block is {a, b} (diagonal) or {{..}, {..}}.
BlockMatrix read_blocks(Cursor& cur, const std::string& section) {
  BlockMatrix out;
  cur.expect('{', section);
  for (;;) {
    cur.skip_space();
    if (cur.at_end()) cur.fail("unexpected end of input in section " + section);
    if (cur.peek() == '}') {
      cur.advance();
      return out;
    }
    if (cur.peek() == ',') {
      cur.advance();
      continue;
    }
    // Look past the opening brace to tell dense from diagonal.
    cur.expect('{', section);
    cur.skip_space();
    if (cur.peek() == '{') {
      std::vector<std::vector<double>> rows;
      for (;;) {
        cur.skip_space();
        if (cur.at_end()) cur.fail("unexpected end of input in section " + section);
        if (cur.peek() == ',') {
          cur.advance();
          continue;
        }
        if (cur.peek() == '}') {
          cur.advance();
          break;
        }
        rows.push_back(read_vector(cur, section));
      }
      const int dim = static_cast<int>(rows.size());
      Eigen::MatrixXd blk(dim, dim);
      for (int r = 0; r < dim; ++r) {
        if (static_cast<int>(rows[r].size()) != dim) {
          cur.fail("dense block in section " + section + " is not square");
        }
        for (int c = 0; c < dim; ++c) blk(r, c) = rows[r][c];
      }
      out.push_back(std::move(blk));
    } else {
      std::vector<double> diag;
      if (cur.peek() == '}') {
        cur.advance();
      } else {
        for (;;) {
          diag.push_back(cur.number(section));
          cur.skip_space();
          if (cur.peek() == ',') {
            cur.advance();
            continue;
          }
          cur.expect('}', section);
          break;
        }
      }
      out.push_back(Eigen::Map<Eigen::VectorXd>(diag.data(), diag.size()));
    }
  }
}

void check_shapes(const BlockMatrix& blocks, const ConicProgram& program,
                  const std::string& section, int line) {
  if (blocks.size() != program.block_sizes.size()) {
    throw SdpaParseError(line, 1,
                         "section " + section + " has " + std::to_string(blocks.size()) +
                             " blocks, program has " +
                             std::to_string(program.block_sizes.size()));
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const int s = program.block_sizes[b];
    const bool ok = s > 0 ? (blocks[b].rows() == s && blocks[b].cols() == s)
                          : (blocks[b].rows() == -s && blocks[b].cols() == 1);
    if (!ok) {
      throw SdpaParseError(line, 1,
                           "section " + section + " block " + std::to_string(b + 1) +
                               " does not match block size " + std::to_string(s));
    }
  }
}

void write_block_list(std::ostream& out, const BlockMatrix& blocks) {
  out << "{\n";
  for (const auto& blk : blocks) {
    const bool dense = blk.cols() > 1 || blk.rows() == 1;
    if (!dense || (blk.rows() == 1 && blk.cols() == 1)) {
      out << '{';
      for (int r = 0; r < blk.rows(); ++r) {
        if (r) out << ',';
        out << format_double(blk(r, 0));
      }
      out << "}\n";
      continue;
    }
    out << "{ ";
    for (int r = 0; r < blk.rows(); ++r) {
      if (r) out << ", ";
      out << '{';
      for (int c = 0; c < blk.cols(); ++c) {
        if (c) out << ',';
        out << format_double(blk(r, c));
      }
      out << '}';
    }
    out << " }\n";
  }
  out << "}\n";
}

BlockMatrix implied_slack(const ConicProgram& program, const std::vector<double>& y) {
  BlockMatrix s = to_blocks(program.objective, program.block_sizes);
  for (auto& blk : s) blk = -blk;
  for (int k = 0; k < program.constraint_count(); ++k) {
    if (y[k] == 0.0) continue;
    const BlockMatrix a = to_blocks(program.constraints[k], program.block_sizes);
    for (std::size_t b = 0; b < s.size(); ++b) s[b] += y[k] * a[b];
  }
  return s;
}

SdpSolution read_sdpa_output(const std::string& text, const ConicProgram& program) {
  SdpSolution sol;
  auto section = [&](const std::string& key) {
    Cursor probe(text);
    if (!probe.seek_key(key)) {
      int lines = 1;
      for (char ch : text) lines += ch == '\n';
      throw SdpaParseError(lines, 1, "missing section " + key);
    }
    return probe;
  };
  Cursor xvec = section("xVec");
  const int xvec_line = xvec.line();
  sol.dual = read_vector(xvec, "xVec");
  if (static_cast<int>(sol.dual.size()) != program.constraint_count()) {
    throw SdpaParseError(xvec_line, 1,
                         "xVec has " + std::to_string(sol.dual.size()) + " entries, program has " +
                             std::to_string(program.constraint_count()) + " constraints");
  }
  Cursor xmat = section("xMat");
  const int xmat_line = xmat.line();
  sol.dual_slack = read_blocks(xmat, "xMat");
  check_shapes(sol.dual_slack, program, "xMat", xmat_line);
  Cursor ymat = section("yMat");
  const int ymat_line = ymat.line();
  sol.primal = read_blocks(ymat, "yMat");
  check_shapes(sol.primal, program, "yMat", ymat_line);

  sol.status = SolveStatus::kIterationLimit;
  {
    Cursor phase(text);
    if (phase.seek_key("phase.value")) {
      phase.skip_space();
      std::string word;
      while (!phase.at_end() && !std::isspace(static_cast<unsigned char>(phase.peek()))) {
        word.push_back(phase.peek());
        phase.advance();
      }
      if (word == "pdOPT") {
        sol.status = SolveStatus::kOptimal;
      } else if (word == "pdFEAS" || word == "noINFO") {
        sol.status = SolveStatus::kNearOptimal;
      } else if (word.find("INF") != std::string::npos) {
        sol.status = SolveStatus::kInfeasibleDetected;
      }
    }
  }
  return sol;
}

SdpSolution read_plain(const std::string& text, const ConicProgram& program) {
  SdpSolution sol;
  std::optional<std::vector<double>> y;
  std::map<int, Eigen::MatrixXd> x_blocks, s_blocks;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const int nblocks = static_cast<int>(program.block_sizes.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_line(line)) continue;
    std::vector<Token> tokens;
    {
      std::size_t k = 0;
      while (k < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[k])) || line[k] == ',') {
          ++k;
          continue;
        }
        const std::size_t start = k;
        while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) &&
               line[k] != ',') {
          ++k;
        }
        tokens.push_back({line.substr(start, k - start), line_no, static_cast<int>(start) + 1});
      }
    }
    if (tokens.empty()) continue;
    const std::string& tag = tokens[0].text;
    if (tag == "y") {
      std::vector<double> v;
      for (std::size_t k = 1; k < tokens.size(); ++k) v.push_back(parse_double(tokens[k]));
      if (static_cast<int>(v.size()) != program.constraint_count()) {
        throw SdpaParseError(line_no, 1,
                             "y lists " + std::to_string(v.size()) + " values, program has " +
                                 std::to_string(program.constraint_count()) + " constraints");
      }
      y = std::move(v);
    } else if (tag == "X" || tag == "S") {
      if (tokens.size() < 2) throw SdpaParseError(line_no, 2, "missing block number");
      const int b = parse_int(tokens[1]) - 1;
      if (b < 0 || b >= nblocks) {
        throw SdpaParseError(tokens[1].line, tokens[1].column, "block number out of range");
      }
      const int s = program.block_sizes[b];
      const int dim = std::abs(s);
      const std::size_t expected = s > 0 ? static_cast<std::size_t>(dim * (dim + 1) / 2) : dim;
      if (tokens.size() - 2 != expected) {
        throw SdpaParseError(line_no, 1,
                             tag + " block " + std::to_string(b + 1) + " needs " +
                                 std::to_string(expected) + " values, found " +
                                 std::to_string(tokens.size() - 2));
      }
      Eigen::MatrixXd blk = s > 0 ? Eigen::MatrixXd::Zero(dim, dim) : Eigen::MatrixXd::Zero(dim, 1);
      std::size_t t = 2;
      if (s > 0) {
        for (int r = 0; r < dim; ++r) {
          for (int c = r; c < dim; ++c) {
            blk(r, c) = blk(c, r) = parse_double(tokens[t++]);
          }
        }
      } else {
        for (int r = 0; r < dim; ++r) blk(r, 0) = parse_double(tokens[t++]);
      }
      (tag == "X" ? x_blocks : s_blocks)[b] = std::move(blk);
    } else {
      throw SdpaParseError(line_no, tokens[0].column, "unknown line tag '" + tag + "'");
    }
  }
  if (!y) throw SdpaParseError(line_no + 1, 1, "missing section y");
  if (static_cast<int>(x_blocks.size()) != nblocks) {
    for (int b = 0; b < nblocks; ++b) {
      if (!x_blocks.count(b)) {
        throw SdpaParseError(line_no + 1, 1, "missing section X block " + std::to_string(b + 1));
      }
    }
  }
  sol.dual = *y;
  for (int b = 0; b < nblocks; ++b) sol.primal.push_back(x_blocks[b]);
  if (s_blocks.empty()) {
    sol.dual_slack = implied_slack(program, sol.dual);
  } else {
    for (int b = 0; b < nblocks; ++b) {
      if (!s_blocks.count(b)) {
        throw SdpaParseError(line_no + 1, 1, "missing section S block " + std::to_string(b + 1));
      }
      sol.dual_slack.push_back(s_blocks[b]);
    }
  }
  sol.status = SolveStatus::kNearOptimal;
  return sol;
}

}  // namespace

ConicProgram canonicalize(const ConicProgram& program) {
  ConicProgram out = program;
  out.objective = canonical_entries(program.objective);
  for (auto& c : out.constraints) c = canonical_entries(c);
  return out;
}

void write_sdpa(const ConicProgram& program, std::ostream& out) {
  program.check();
  const ConicProgram canon = canonicalize(program);
  out << canon.constraint_count() << '\n' << canon.block_sizes.size() << '\n';
  for (std::size_t b = 0; b < canon.block_sizes.size(); ++b) {
    out << (b ? " " : "") << canon.block_sizes[b];
  }
  out << '\n';
  for (std::size_t k = 0; k < canon.rhs.size(); ++k) {
    out << (k ? " " : "") << format_double(canon.rhs[k]);
  }
  out << '\n';
  for (const auto& e : canon.objective) emit_entry(out, 0, e);
  for (int k = 0; k < canon.constraint_count(); ++k) {
    for (const auto& e : canon.constraints[k]) emit_entry(out, k + 1, e);
  }
}

void write_sdpa(const ConicProgram& program, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_sdpa(program, out);
  if (!out) throw IoError("write failed: " + path.string());
}

ConicProgram read_sdpa(std::istream& in) {
  const std::vector<Token> tokens = tokenize_dat(read_all(in));
  std::size_t pos = 0;
  auto next = [&](const char* what) -> const Token& {
    if (pos >= tokens.size()) {
      const int line = tokens.empty() ? 1 : tokens.back().line + 1;
      throw SdpaParseError(line, 1, std::string("unexpected end of file, expected ") + what);
    }
    return tokens[pos++];
  };
  ConicProgram p;
  const Token& mdim_tok = next("mDIM");
  const int mdim = parse_int(mdim_tok);
  if (mdim < 0) throw SdpaParseError(mdim_tok.line, mdim_tok.column, "negative mDIM");
  const Token& nblock_tok = next("nBLOCK");
  const int nblock = parse_int(nblock_tok);
  if (nblock <= 0) throw SdpaParseError(nblock_tok.line, nblock_tok.column, "nBLOCK must be positive");
  for (int b = 0; b < nblock; ++b) {
    const Token& t = next("block size");
    const int s = parse_int(t);
    if (s == 0) throw SdpaParseError(t.line, t.column, "zero block size");
    p.block_sizes.push_back(s);
  }
  for (int k = 0; k < mdim; ++k) p.rhs.push_back(parse_double(next("rhs entry")));
  p.constraints.resize(mdim);
  while (pos < tokens.size()) {
    const Token& mt = next("matrix number");
    const int matno = parse_int(mt);
    const Token& bt = next("block number");
    const int blk = parse_int(bt) - 1;
    const Token& it = next("row index");
    const int i = parse_int(it) - 1;
    const Token& jt = next("column index");
    const int j = parse_int(jt) - 1;
    const double v = parse_double(next("entry value"));
    if (matno < 0 || matno > mdim) {
      throw SdpaParseError(mt.line, mt.column, "matrix number out of range");
    }
    if (blk < 0 || blk >= nblock) {
      throw SdpaParseError(bt.line, bt.column, "block number out of range");
    }
    const int dim = std::abs(p.block_sizes[blk]);
    if (i < 0 || i >= dim) throw SdpaParseError(it.line, it.column, "row index out of range");
    if (j < 0 || j >= dim) throw SdpaParseError(jt.line, jt.column, "column index out of range");
    if (p.block_sizes[blk] < 0 && i != j) {
      throw SdpaParseError(it.line, it.column, "off-diagonal entry in a diagonal block");
    }
    SparseEntry e{blk, std::min(i, j), std::max(i, j), v};
    (matno == 0 ? p.objective : p.constraints[matno - 1]).push_back(e);
  }
  return p;
}

ConicProgram read_sdpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_sdpa(in);
}

void write_sdpa_solution(const SdpSolution& solution, std::ostream& out) {
  out << "\"solution in SDPA output convention\n";
  std::string phase = "noINFO";
  if (solution.status == SolveStatus::kOptimal) phase = "pdOPT";
  if (solution.status == SolveStatus::kNearOptimal) phase = "pdFEAS";
  if (solution.status == SolveStatus::kInfeasibleDetected) phase = "pdINF";
  out << "phase.value  = " << phase << '\n';
  out << "iteration    = " << solution.iterations << '\n';
  out << "objValPrimal = " << format_double(solution.dual_objective) << '\n';
  out << "objValDual   = " << format_double(solution.primal_objective) << '\n';
  out << "xVec =\n{";
  for (std::size_t k = 0; k < solution.dual.size(); ++k) {
    out << (k ? "," : "") << format_double(solution.dual[k]);
  }
  out << "}\n";
  out << "xMat =\n";
  write_block_list(out, solution.dual_slack);
  out << "yMat =\n";
  write_block_list(out, solution.primal);
}

SdpSolution read_sdpa_solution(std::istream& in, const ConicProgram& program) {
  const std::string text = read_all(in);
  const bool sdpa_style = text.find("xVec") != std::string::npos ||
                          text.find("yMat") != std::string::npos ||
                          text.find("xMat") != std::string::npos;
  SdpSolution sol = sdpa_style ? read_sdpa_output(text, program) : read_plain(text, program);
  evaluate_solution(program, sol);
  return sol;
}

SdpSolution read_sdpa_solution(const std::filesystem::path& path, const ConicProgram& program) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_sdpa_solution(in, program);
}

}  // namespace occsynth
