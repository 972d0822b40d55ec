//! Helpers shared by the integration tests: reference evaluators that do not
//! go through the compiler, random expression generation, an IR shape
//! checker and the corpus loader.
#![allow(dead_code)]

pub mod props;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use petit::irvm::RuntimeError;
use petit::{Category, Node};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Evaluation errors

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalError {
    DivisionByZero,
    DivisionOverflow,
    InputExhausted,
}

impl EvalError {
    pub fn from_runtime(e: &RuntimeError) -> Option<EvalError> {
        match e {
            RuntimeError::DivisionByZero => Some(EvalError::DivisionByZero),
            RuntimeError::DivisionOverflow => Some(EvalError::DivisionOverflow),
            RuntimeError::InputExhausted => Some(EvalError::InputExhausted),
            _ => None,
        }
    }

    pub fn message(self) -> &'static str {
        match self {
            EvalError::DivisionByZero => "runtime error: division by zero",
            EvalError::DivisionOverflow => "runtime error: division overflow",
            EvalError::InputExhausted => "runtime error: input exhausted",
        }
    }
}

/// Decimal digits reduced modulo 2^32, one digit at a time.
pub fn literal_value(digits: &str) -> i32 {
    let mut v: u64 = 0;
    for d in digits.bytes() {
        v = (v * 10 + u64::from(d - b'0')) % (1 << 32);
    }
    v as u32 as i32
}

/// Truncating signed division on 32 bits, computed in 64 bits.
pub fn divide(a: i32, b: i32) -> Result<i32, EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    let q = i64::from(a) / i64::from(b);
    if q > i64::from(i32::MAX) {
        return Err(EvalError::DivisionOverflow);
    }
    Ok(q as i32)
}

fn wrap(v: i64) -> i32 {
    (v.rem_euclid(1 << 32) as u64 as u32) as i32
}

/// Input queue and output log for `read` and `write`.
#[derive(Debug, Default)]
pub struct World {
    pub input: VecDeque<i32>,
    pub output: Vec<i32>,
}

impl World {
    pub fn new(input: impl IntoIterator<Item = i32>) -> World {
        World { input: input.into_iter().collect(), output: Vec::new() }
    }

    fn builtin(&mut self, name: &str, arg: i32) -> Option<Result<i32, EvalError>> {
        match name {
            "read" => Some(self.input.pop_front().ok_or(EvalError::InputExhausted)),
            "write" => {
                self.output.push(arg);
                Some(Ok(arg))
            }
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Big-step evaluation of a parsed program

pub struct AstOracle<'p> {
    functions: HashMap<&'p str, &'p Node>,
}

impl<'p> AstOracle<'p> {
    pub fn new(program: &'p Node) -> Self {
        assert_eq!(program.category, Category::Program);
        let functions = program.children.iter().map(|f| (f.children[0].lexeme(), f)).collect();
        AstOracle { functions }
    }

    pub fn call(&self, name: &str, args: &[i32], world: &mut World) -> Result<i32, EvalError> {
        if let Some(r) = self.functions.get(name).is_none().then(|| world.builtin(name, args[0])).flatten() {
            return r;
        }
        let function = self.functions[name];
        let env: HashMap<&str, i32> = function.children[1]
            .children
            .iter()
            .map(|p| p.children[1].lexeme())
            .zip(args.iter().copied())
            .collect();
        self.eval(&function.children[2], &env, world)
    }

    fn eval(&self, node: &Node, env: &HashMap<&str, i32>, world: &mut World) -> Result<i32, EvalError> {
        let child = |i: usize, world: &mut World| self.eval(&node.children[i], env, world);
        Ok(match node.category {
            Category::Natural => literal_value(node.lexeme()),
            Category::Identifier => env[node.lexeme()],
            Category::Add => wrap(i64::from(child(0, world)?) + i64::from(child(1, world)?)),
            Category::Sub => wrap(i64::from(child(0, world)?) - i64::from(child(1, world)?)),
            Category::Mul => wrap(i64::from(child(0, world)?) * i64::from(child(1, world)?)),
            Category::Div => {
                let a = child(0, world)?;
                divide(a, child(1, world)?)?
            }
            Category::If => {
                if child(0, world)? != 0 {
                    child(1, world)?
                } else {
                    child(2, world)?
                }
            }
            Category::Call => {
                let mut args = Vec::new();
                for a in &node.children[1].children {
                    args.push(self.eval(a, env, world)?);
                }
                self.call(node.children[0].lexeme(), &args, world)?
            }
            other => panic!("not an integer expression: {other:?}"),
        })
    }
}

/// Runs `f` on a thread with a large stack, for deeply recursive oracles.
pub fn with_big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new().stack_size(512 << 20).spawn(f).unwrap().join().unwrap()
}

// ---------------------------------------------------------------------------
// Random expressions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

pub const OPS: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    pub fn level(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }

    pub fn category(self) -> &'static str {
        match self {
            Op::Add => "Add",
            Op::Sub => "Sub",
            Op::Mul => "Mul",
            Op::Div => "Div",
        }
    }

    pub fn apply(self, a: i32, b: i32) -> Result<i32, EvalError> {
        let (a, b) = (i64::from(a), i64::from(b));
        Ok(match self {
            Op::Add => wrap(a + b),
            Op::Sub => wrap(a - b),
            Op::Mul => wrap(a * b),
            Op::Div => divide(a as i32, b as i32)?,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Expr {
    Num(u64),
    Var(&'static str),
    Bin(Op, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(&'static str, Vec<Expr>),
}

/// Helper functions available to generated expressions, which are the body
/// of `f(integer a, integer b)`.
pub const PRELUDE: &str = "sq(integer x) = x * x\npick(integer c, integer t, integer e) = if c then t else e\n";

pub fn program_for(body: &str) -> String {
    format!("{PRELUDE}f(integer a, integer b) = {body}\n")
}

fn literal() -> impl Strategy<Value = Expr> {
    prop_oneof![
        4 => (0u64..10).prop_map(Expr::Num),
        1 => any::<u32>().prop_map(|v| Expr::Num(u64::from(v))),
        1 => prop_oneof![Just(2147483648u64), Just(4294967295u64), Just(4294967296u64 + 7)].prop_map(Expr::Num),
    ]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![Just(Op::Add), Just(Op::Sub), Just(Op::Mul), Just(Op::Div)]
}

/// Arithmetic and if-then-else over literals only.
pub fn calc_expr() -> impl Strategy<Value = Expr> {
    literal().prop_recursive(6, 48, 3, |inner| {
        prop_oneof![
            4 => (op(), inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Bin(o, Box::new(l), Box::new(r))),
            1 => (inner.clone(), inner.clone(), inner).prop_map(|(c, t, e)| Expr::If(Box::new(c), Box::new(t), Box::new(e))),
        ]
    })
}

/// Expressions over `a`, `b`, the helpers and the builtins.
pub fn program_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![3 => literal(), 1 => Just(Expr::Var("a")), 1 => Just(Expr::Var("b"))];
    leaf.prop_recursive(6, 64, 3, |inner| {
        let boxed = |e: Expr| Box::new(e);
        prop_oneof![
            6 => (op(), inner.clone(), inner.clone()).prop_map(move |(o, l, r)| Expr::Bin(o, boxed(l), boxed(r))),
            2 => (inner.clone(), inner.clone(), inner.clone())
                .prop_map(|(c, t, e)| Expr::If(Box::new(c), Box::new(t), Box::new(e))),
            1 => inner.clone().prop_map(|x| Expr::Call("sq", vec![x])),
            1 => (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| Expr::Call("pick", vec![c, t, e])),
            1 => inner.clone().prop_map(|x| Expr::Call("write", vec![x])),
            1 => inner.prop_map(|x| Expr::Call("read", vec![x])),
        ]
    })
}

impl Expr {
    pub fn eval(&self, a: i32, b: i32, world: &mut World) -> Result<i32, EvalError> {
        match self {
            Expr::Num(v) => Ok(literal_value(&v.to_string())),
            Expr::Var(name) => Ok(if *name == "a" { a } else { b }),
            Expr::Bin(op, l, r) => {
                let x = l.eval(a, b, world)?;
                op.apply(x, r.eval(a, b, world)?)
            }
            Expr::If(c, t, e) => {
                if c.eval(a, b, world)? != 0 {
                    t.eval(a, b, world)
                } else {
                    e.eval(a, b, world)
                }
            }
            Expr::Call(name, args) => {
                let mut values = Vec::new();
                for x in args {
                    values.push(x.eval(a, b, world)?);
                }
                match *name {
                    "sq" => Op::Mul.apply(values[0], values[0]),
                    "pick" => Ok(if values[0] != 0 { values[1] } else { values[2] }),
                    other => world.builtin(other, values[0]).unwrap(),
                }
            }
        }
    }

    /// Every operator and conditional wrapped in parentheses.
    pub fn print_full(&self) -> String {
        match self {
            Expr::Num(v) => v.to_string(),
            Expr::Var(name) => name.to_string(),
            Expr::Bin(op, l, r) => format!("({} {} {})", l.print_full(), op.symbol(), r.print_full()),
            Expr::If(c, t, e) => format!("(if {} then {} else {})", c.print_full(), t.print_full(), e.print_full()),
            Expr::Call(name, args) => {
                let args: Vec<String> = args.iter().map(Expr::print_full).collect();
                format!("{name}({})", args.join(", "))
            }
        }
    }

    /// Parentheses only where the grammar needs them.
    pub fn print_minimal(&self) -> String {
        self.minimal(0, true)
    }

    /// `min_level`: binding level required by the context. `tail`: nothing
    /// that could continue an expression follows.
    fn minimal(&self, min_level: u8, tail: bool) -> String {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => match self {
                Expr::Call(name, args) => {
                    let args: Vec<String> = args.iter().map(|x| x.minimal(0, true)).collect();
                    format!("{name}({})", args.join(", "))
                }
                _ => self.print_full(),
            },
            Expr::Bin(op, l, r) => {
                let level = op.level();
                let wrapped = level < min_level;
                let right_tail = wrapped || tail;
                let text = format!("{} {} {}", l.minimal(level, false), op.symbol(), r.minimal(level + 1, right_tail));
                if wrapped {
                    format!("({text})")
                } else {
                    text
                }
            }
            Expr::If(c, t, e) => {
                let text = format!("if {} then {} else {}", c.minimal(0, true), t.minimal(0, true), e.minimal(0, true));
                if tail {
                    text
                } else {
                    format!("({text})")
                }
            }
        }
    }

    /// The untyped tree listing this expression should parse to.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        self.listing_at(0, &mut out);
        out
    }

    fn listing_at(&self, depth: usize, out: &mut String) {
        let pad = "__".repeat(depth);
        match self {
            Expr::Num(v) => out.push_str(&format!("{pad}Natural({v})\n")),
            Expr::Var(name) => out.push_str(&format!("{pad}Identifier({name})\n")),
            Expr::Bin(op, l, r) => {
                out.push_str(&format!("{pad}{}\n", op.category()));
                l.listing_at(depth + 1, out);
                r.listing_at(depth + 1, out);
            }
            Expr::If(c, t, e) => {
                out.push_str(&format!("{pad}If\n"));
                for x in [c, t, e] {
                    x.listing_at(depth + 1, out);
                }
            }
            Expr::Call(name, args) => {
                out.push_str(&format!("{pad}Call\n{pad}__Identifier({name})\n{pad}__Arguments\n"));
                for x in args {
                    x.listing_at(depth + 2, out);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Textual IR shape checks

/// Checks every function in `ir`: each value is defined once, unnamed
/// temporaries are numbered consecutively from 1, every used value is defined
/// earlier, every block ends in exactly one terminator and every branch
/// target exists.
pub fn check_ir_shape(ir: &str) -> Result<(), String> {
    let mut lines = ir.lines().enumerate();
    let mut functions = 0;
    while let Some((n, line)) = lines.next() {
        let line = line.trim();
        if !line.starts_with("define ") {
            continue;
        }
        functions += 1;
        let open = line.find('(').ok_or(format!("line {}: no parameter list", n + 1))?;
        let close = line.rfind(')').ok_or(format!("line {}: no parameter list", n + 1))?;
        let mut defined: HashSet<String> = HashSet::new();
        for param in line[open + 1..close].split(',').filter(|p| !p.trim().is_empty()) {
            let name = param.split_whitespace().last().unwrap().to_string();
            if !defined.insert(name.clone()) {
                return Err(format!("line {}: parameter {name} repeated", n + 1));
            }
        }

        let mut next_temp = 1;
        let mut labels = HashSet::new();
        let mut targets = Vec::new();
        let mut block_open = true;
        let mut closed = false;
        for (m, body) in lines.by_ref() {
            let body = body.trim();
            let at = |msg: String| format!("line {}: {msg}", m + 1);
            if body == "}" {
                if block_open {
                    return Err(at("block without terminator".into()));
                }
                closed = true;
                break;
            }
            if body.is_empty() {
                continue;
            }
            if let Some(label) = body.strip_suffix(':') {
                if block_open {
                    return Err(at(format!("block before {label} has no terminator")));
                }
                if !labels.insert(label.to_string()) {
                    return Err(at(format!("label {label} repeated")));
                }
                block_open = true;
                continue;
            }
            if !block_open {
                return Err(at("instruction after terminator".into()));
            }
            let (dest, rhs) = match body.split_once(" = ") {
                Some((d, r)) => (Some(d.trim()), r),
                None => (None, body),
            };
            let mut previous = "";
            for word in rhs.split(|c: char| c.is_whitespace() || c == ',' || c == '(' || c == ')') {
                if word.is_empty() {
                    continue;
                }
                if let Some(name) = word.strip_prefix('%') {
                    if previous == "label" {
                        targets.push(name.to_string());
                    } else if !defined.contains(word) {
                        return Err(at(format!("{word} used before definition")));
                    }
                }
                previous = word;
            }
            if let Some(dest) = dest {
                if !defined.insert(dest.to_string()) {
                    return Err(at(format!("{dest} defined twice")));
                }
                if let Ok(k) = dest.trim_start_matches('%').parse::<u32>() {
                    if k != next_temp {
                        return Err(at(format!("{dest} out of sequence, expected %{next_temp}")));
                    }
                    next_temp += 1;
                }
            }
            if body.starts_with("br ") || body.starts_with("ret ") {
                block_open = false;
            }
        }
        if !closed {
            return Err("function not closed".into());
        }
        for t in targets {
            if !labels.contains(&t) {
                return Err(format!("branch to unknown label {t}"));
            }
        }
    }
    if functions == 0 {
        return Err("no functions".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Corpus

pub struct CorpusCase {
    pub name: String,
    pub source: String,
    pub input: Option<String>,
    pub expected: Option<String>,
}

pub fn test_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

pub fn golden(name: &str) -> String {
    fs::read_to_string(test_dir("golden").join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus() -> Vec<CorpusCase> {
    let dir = test_dir("corpus");
    let mut cases: Vec<CorpusCase> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| {
            let path = e.unwrap().path();
            (path.extension()? == "pt").then_some(path)
        })
        .map(|path| CorpusCase {
            name: path.file_stem().unwrap().to_string_lossy().into_owned(),
            source: fs::read_to_string(&path).unwrap(),
            input: fs::read_to_string(path.with_extension("in")).ok(),
            expected: fs::read_to_string(path.with_extension("out")).ok(),
        })
        .collect();
    cases.sort_by(|a, b| a.name.cmp(&b.name));
    assert!(cases.len() >= 10, "corpus missing from {}", dir.display());
    cases
}

pub fn parse_ints(text: &str) -> Vec<i32> {
    text.split_whitespace().map(|w| w.parse().unwrap()).collect()
}

// ---------------------------------------------------------------------------
// Semantic error suite: (case, source, the single expected diagnostic)

pub const SEMANTIC_CASES: &[(&str, &str, &str)] = &[
    ("duplicate function", "f(integer a) = a\nf(integer b) = b\n", "Line 2, column 1: identifier f already declared"),
    ("duplicate parameter", "f(integer a, double a) = 1\n", "Line 1, column 21: identifier a already declared"),
    ("undeclared identifier", "f(integer a) = b\n", "Line 1, column 16: unknown identifier b"),
    ("unknown callee", "g(integer a) = h(a)\n", "Line 1, column 16: unknown identifier h"),
    (
        "wrong arity",
        "g(integer a) = write(a, a)\n",
        "Line 1, column 16: wrong number of arguments in call to write (got 2, expected 1)",
    ),
    ("mixed-type operation", "f(integer a, double d) = a + d\n", "Line 1, column 28: incompatible types in add operation"),
    ("scope isolation", "f(integer a) = a\ng(integer b) = a\n", "Line 2, column 16: unknown identifier a"),
    (
        "double condition",
        "f(double d) =\n  if d then 1 else 2\n",
        "Line 2, column 3: incompatible condition type in if expression",
    ),
];

/// Runs the `petitc` binary; returns (exit code, stdout, stderr).
pub fn petitc(args: &[&str], stdin: &str) -> (i32, String, String) {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new(env!("CARGO_BIN_EXE_petitc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("petitc binary");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

pub fn path_str(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}
