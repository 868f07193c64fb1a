#include "mpicheck/parser.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "mpicheck/errors.hpp"

namespace mpicheck {
namespace {

enum class Tok { Ident, Integer, LBrace, RBrace, Sep, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    i += n;
    col += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (c == '\n' || c == ',') {
      out.push_back({Tok::Sep, std::string(1, c), line, col});
      if (c == '\n') {
        ++i;
        ++line;
        col = 1;
      } else {
        advance(1);
      }
    } else if (c == '{' || c == '}') {
      out.push_back({c == '{' ? Tok::LBrace : Tok::RBrace, std::string(1, c), line, col});
      advance(1);
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      out.push_back({Tok::Ident, std::string(text.substr(i, j - i)), line, col});
      advance(j - i);
    } else if (digit(c)) {
      std::size_t j = i;
      while (j < text.size() && digit(text[j])) ++j;
      if (j < text.size() && ident_char(text[j]))
        throw ParseError(ParseError::Kind::Lex, line, col + (j - i), "malformed number");
      out.push_back({Tok::Integer, std::string(text.substr(i, j - i)), line, col});
      advance(j - i);
    } else {
      std::string shown = (static_cast<unsigned char>(c) < 0x20 || static_cast<unsigned char>(c) >= 0x7f)
                              ? "byte 0x" + [&] {
                                  std::ostringstream hex;
                                  hex << std::hex << static_cast<int>(static_cast<unsigned char>(c));
                                  return hex.str();
                                }()
                              : "'" + std::string(1, c) + "'";
      throw ParseError(ParseError::Kind::Lex, line, col, "illegal character " + shown);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "node" || s == "send" || s == "recv" || s == "to" || s == "from" || s == "for" || s == "inf";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    skip_seps();
    // Pre-scan node headers so ranks follow declaration order even when a
    // node is referenced before it is declared.
    for (std::size_t k = 0; k + 1 < toks_.size(); ++k) {
      if (toks_[k].kind == Tok::Ident && toks_[k].text == "node" && toks_[k + 1].kind == Tok::Ident &&
          (k == 0 || toks_[k - 1].kind == Tok::Sep || toks_[k - 1].kind == Tok::RBrace))
        intern(toks_[k + 1].text);
    }
    if (peek().kind == Tok::End) fail(peek(), "expected at least one node declaration");
    while (peek().kind != Tok::End) {
      program_.nodes.push_back(node());
      skip_seps();
    }
    program_.names = names_;
    return std::move(program_);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    std::string found = t.kind == Tok::End ? "end of input"
                        : t.kind == Tok::Sep ? (t.text == "\n" ? "end of line" : "','")
                                             : "'" + t.text + "'";
    throw ParseError(ParseError::Kind::Syntax, t.line, t.column, msg + ", found " + found);
  }

  void skip_seps() {
    while (peek().kind == Tok::Sep) ++pos_;
  }

  void keyword(const char* kw) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || t.text != kw) fail(t, std::string("expected '") + kw + "'");
    ++pos_;
  }

  const Token& ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail(t, std::string("expected ") + what);
    return take();
  }

  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek(), std::string("expected ") + what);
    ++pos_;
  }

  NodeId intern(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    NodeId id{static_cast<std::uint32_t>(names_.size())};
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
  }

  Node node() {
    keyword("node");
    const Token& name = ident("node name");
    Node n{intern(name.text), {}};
    current_ = n.id;
    n.body = block();
    return n;
  }

  Statements block() {
    expect(Tok::LBrace, "'{'");
    Statements body;
    skip_seps();
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) fail(peek(), "expected '}'");
      body.push_back(statement());
      const Token& after = peek();
      if (after.kind != Tok::Sep && after.kind != Tok::RBrace && !(after.kind == Tok::Ident && starts_statement(after)))
        fail(after, "expected statement separator");
      skip_seps();
    }
    ++pos_;
    return body;
  }

  static bool starts_statement(const Token& t) { return t.text == "send" || t.text == "recv" || t.text == "for"; }

  Statement statement() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || !starts_statement(t)) fail(t, "expected 'send', 'recv' or 'for'");
    if (t.text == "for") {
      ++pos_;
      const Token& c = peek();
      std::optional<LoopCount> count;
      if (c.kind == Tok::Ident && c.text == "inf") {
        count = LoopCount::infinite();
      } else if (c.kind == Tok::Integer) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(c.text.data(), c.text.data() + c.text.size(), v);
        if (ec != std::errc{} || ptr != c.text.data() + c.text.size())
          throw ParseError(ParseError::Kind::Syntax, c.line, c.column, "loop count out of range");
        if (v == 0) throw ParseError(ParseError::Kind::Syntax, c.line, c.column, "loop count must be positive");
        count = LoopCount::finite(v);
      } else {
        fail(c, "expected loop count (integer or 'inf')");
      }
      ++pos_;
      return Statement::loop(*count, block());
    }
    bool is_send = t.text == "send";
    ++pos_;
    const Token& msg = ident("message name");
    keyword(is_send ? "to" : "from");
    const Token& peer = ident("node name");
    NodeId other = intern(peer.text);
    Symbol sym{msg.text, is_send ? current_ : other, is_send ? other : current_};
    return is_send ? Statement::send(std::move(sym)) : Statement::recv(std::move(sym));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program program_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> ids_;
  NodeId current_;
};

void render_body(const Program& p, const Statements& body, int depth, std::ostringstream& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  for (const Statement& s : body) {
    switch (s.kind) {
      case Statement::Kind::Send:
        out << indent << "send " << s.sym.name << " to " << p.name_of(s.sym.dst) << "\n";
        break;
      case Statement::Kind::Recv:
        out << indent << "recv " << s.sym.name << " from " << p.name_of(s.sym.src) << "\n";
        break;
      case Statement::Kind::Loop:
        out << indent << "for ";
        if (s.count.is_infinite())
          out << "inf";
        else
          out << s.count.value();
        out << " {\n";
        render_body(p, s.body, depth + 1, out);
        out << indent << "}\n";
        break;
    }
  }
}

}  // namespace

Program parse(std::string_view text) { return Parser(lex(text)).run(); }

std::string render(const Program& program) {
  std::ostringstream out;
  bool first = true;
  for (const Node& n : program.nodes) {
    if (!first) out << "\n";
    first = false;
    out << "node " << program.name_of(n.id) << " {\n";
    render_body(program, n.body, 1, out);
    out << "}\n";
  }
  return out.str();
}

Program parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace mpicheck
