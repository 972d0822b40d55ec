//! Parser and interpreter for the IR subset the code generator emits.
//!
//! Supported: `declare`, `define`, `add`/`sub`/`mul`/`sdiv`, `icmp ne`,
//! `br` (both forms), `alloca`, `store`, `load`, `call` and `ret`, over
//! `i32`, `i1` and pointers to `i32` (written `i32*` or `ptr`).
//! Calls are executed on an explicit frame stack so deep recursion is
//! bounded by [`Limits::max_depth`] rather than the native stack.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("ir parse error at line {line}: {detail}")]
pub struct IrParseError {
    pub line: usize,
    pub detail: String,
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("runtime error: division by zero")]
    DivisionByZero,
    #[error("runtime error: division overflow")]
    DivisionOverflow,
    #[error("runtime error: call depth exceeded")]
    CallDepthExceeded,
    #[error("runtime error: input exhausted")]
    InputExhausted,
    #[error("runtime error: undefined function @{0}")]
    UndefinedFunction(String),
    #[error("runtime error: @{name} expects {expected} arguments, got {got}")]
    ArgumentCount { name: String, expected: usize, got: usize },
    #[error("runtime error: {0}")]
    InvalidValue(&'static str),
    #[error("runtime error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    SDiv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    Reg(usize),
    Const(i32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Callee {
    Defined(usize),
    Declared(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Binary { dest: usize, op: BinOp, lhs: Operand, rhs: Operand },
    IcmpNe { dest: usize, lhs: Operand, rhs: Operand },
    Alloca { dest: usize },
    Store { value: Operand, ptr: Operand },
    Load { dest: usize, ptr: Operand },
    Call { dest: Option<usize>, callee: Callee, args: Vec<Operand> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminator {
    Br(usize),
    CondBr { cond: Operand, on_true: usize, on_false: usize },
    Ret(Operand),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// `None` for an unlabeled entry block.
    pub label: Option<String>,
    pub instructions: Vec<Instruction>,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrFunction {
    pub name: String,
    pub params: Vec<String>,
    pub blocks: Vec<Block>,
    /// Register names by index; parameters come first.
    pub registers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declare {
    pub name: String,
    pub params: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IrModule {
    pub declares: Vec<Declare>,
    pub functions: Vec<IrFunction>,
}

impl IrModule {
    pub fn function(&self, name: &str) -> Option<&IrFunction> {
        let name = name.strip_prefix('@').unwrap_or(name);
        self.functions.iter().find(|f| f.name == name)
    }

    fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.name == name)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Local(String),
    Global(String),
    Int(i64),
    Punct(char),
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '-')
}

fn lex_line(line: &str) -> Result<Vec<Tok>, String> {
    let mut toks = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == ';' {
            break;
        }
        let take_name = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
            let from = chars.peek().map_or(line.len(), |&(i, _)| i);
            let mut to = from;
            while let Some(&(i, c)) = chars.peek() {
                if !is_name_char(c) {
                    break;
                }
                to = i + c.len_utf8();
                chars.next();
            }
            line[from..to].to_string()
        };
        match c {
            '%' | '@' => {
                chars.next();
                let name = take_name(&mut chars);
                if name.is_empty() {
                    return Err(format!("expected a name after '{c}'"));
                }
                toks.push(if c == '%' { Tok::Local(name) } else { Tok::Global(name) });
            }
            '(' | ')' | ',' | '=' | '*' | '{' | '}' | ':' => {
                chars.next();
                toks.push(Tok::Punct(c));
            }
            c if c == '-' || c.is_ascii_digit() => {
                let text = take_name(&mut chars);
                let value = text.parse::<i64>().map_err(|_| format!("invalid integer literal {text}"))?;
                toks.push(Tok::Int(value));
            }
            c if is_name_char(c) => {
                toks.push(Tok::Word(take_name(&mut chars)));
            }
            _ => return Err(format!("unexpected character '{}'", &line[start..start + c.len_utf8()])),
        }
    }
    Ok(toks)
}

struct LineCursor {
    toks: Vec<Tok>,
    at: usize,
}

impl LineCursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect_punct(&mut self, c: char) -> Result<(), String> {
        match self.next() {
            Some(Tok::Punct(p)) if p == c => Ok(()),
            other => Err(format!("expected '{c}', found {}", describe(other.as_ref()))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<(), String> {
        match self.next() {
            Some(Tok::Word(x)) if x == w => Ok(()),
            other => Err(format!("expected '{w}', found {}", describe(other.as_ref()))),
        }
    }

    fn expect_local(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Local(name)) => Ok(name),
            other => Err(format!("expected a local name, found {}", describe(other.as_ref()))),
        }
    }

    fn expect_global(&mut self) -> Result<String, String> {
        match self.next() {
            Some(Tok::Global(name)) => Ok(name),
            other => Err(format!("expected a global name, found {}", describe(other.as_ref()))),
        }
    }

    /// Accepts `i32*` or `ptr`.
    fn expect_pointer_type(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Tok::Word(w)) if w == "ptr" => Ok(()),
            Some(Tok::Word(w)) if w == "i32" => self.expect_punct('*'),
            other => Err(format!("expected a pointer type, found {}", describe(other.as_ref()))),
        }
    }

    fn finish(&self) -> Result<(), String> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(format!("unexpected trailing {}", describe(Some(t)))),
        }
    }
}

fn describe(tok: Option<&Tok>) -> String {
    match tok {
        None => "end of line".to_string(),
        Some(Tok::Word(w)) => format!("'{w}'"),
        Some(Tok::Local(n)) => format!("'%{n}'"),
        Some(Tok::Global(n)) => format!("'@{n}'"),
        Some(Tok::Int(v)) => format!("'{v}'"),
        Some(Tok::Punct(c)) => format!("'{c}'"),
    }
}

#[derive(Debug)]
enum RawOperand {
    Local(String),
    Const(i32),
}

#[derive(Debug)]
enum RawInstruction {
    Binary { dest: String, op: BinOp, lhs: RawOperand, rhs: RawOperand },
    IcmpNe { dest: String, lhs: RawOperand, rhs: RawOperand },
    Alloca { dest: String },
    Store { value: RawOperand, ptr: RawOperand },
    Load { dest: String, ptr: RawOperand },
    Call { dest: Option<String>, callee: String, args: Vec<RawOperand> },
    Br(String),
    CondBr { cond: RawOperand, on_true: String, on_false: String },
    Ret(RawOperand),
}

impl RawInstruction {
    fn is_terminator(&self) -> bool {
        matches!(self, RawInstruction::Br(_) | RawInstruction::CondBr { .. } | RawInstruction::Ret(_))
    }
}

fn parse_operand(cur: &mut LineCursor) -> Result<RawOperand, String> {
    match cur.next() {
        Some(Tok::Local(name)) => Ok(RawOperand::Local(name)),
        Some(Tok::Int(v)) => i32::try_from(v)
            .or_else(|_| u32::try_from(v).map(|u| u as i32))
            .map(RawOperand::Const)
            .map_err(|_| format!("integer constant {v} does not fit in i32")),
        Some(Tok::Word(w)) if w == "true" => Ok(RawOperand::Const(1)),
        Some(Tok::Word(w)) if w == "false" => Ok(RawOperand::Const(0)),
        other => Err(format!("expected an operand, found {}", describe(other.as_ref()))),
    }
}

fn parse_label_ref(cur: &mut LineCursor) -> Result<String, String> {
    cur.expect_word("label")?;
    cur.expect_local()
}

fn parse_instruction(toks: Vec<Tok>) -> Result<RawInstruction, String> {
    let mut cur = LineCursor { toks, at: 0 };
    let dest = if matches!(cur.toks.get(1), Some(Tok::Punct('='))) {
        let d = cur.expect_local()?;
        cur.expect_punct('=')?;
        Some(d)
    } else {
        None
    };
    let opcode = match cur.next() {
        Some(Tok::Word(w)) => w,
        other => return Err(format!("expected an instruction, found {}", describe(other.as_ref()))),
    };
    let need_dest = |dest: Option<String>| dest.ok_or_else(|| format!("'{opcode}' needs a result register"));
    let no_dest = |dest: &Option<String>| match dest {
        Some(d) => Err(format!("'{opcode}' does not produce a value (assigned to %{d})")),
        None => Ok(()),
    };
    let inst = match opcode.as_str() {
        "add" | "sub" | "mul" | "sdiv" => {
            let op = match opcode.as_str() {
                "add" => BinOp::Add,
                "sub" => BinOp::Sub,
                "mul" => BinOp::Mul,
                _ => BinOp::SDiv,
            };
            // optional nsw/nuw flags
            while matches!(cur.peek(), Some(Tok::Word(w)) if w == "nsw" || w == "nuw") {
                cur.next();
            }
            cur.expect_word("i32")?;
            let lhs = parse_operand(&mut cur)?;
            cur.expect_punct(',')?;
            let rhs = parse_operand(&mut cur)?;
            RawInstruction::Binary { dest: need_dest(dest)?, op, lhs, rhs }
        }
        "icmp" => {
            cur.expect_word("ne")?;
            cur.expect_word("i32")?;
            let lhs = parse_operand(&mut cur)?;
            cur.expect_punct(',')?;
            let rhs = parse_operand(&mut cur)?;
            RawInstruction::IcmpNe { dest: need_dest(dest)?, lhs, rhs }
        }
        "alloca" => {
            cur.expect_word("i32")?;
            RawInstruction::Alloca { dest: need_dest(dest)? }
        }
        "store" => {
            no_dest(&dest)?;
            cur.expect_word("i32")?;
            let value = parse_operand(&mut cur)?;
            cur.expect_punct(',')?;
            cur.expect_pointer_type()?;
            let ptr = parse_operand(&mut cur)?;
            RawInstruction::Store { value, ptr }
        }
        "load" => {
            cur.expect_word("i32")?;
            cur.expect_punct(',')?;
            cur.expect_pointer_type()?;
            let ptr = parse_operand(&mut cur)?;
            RawInstruction::Load { dest: need_dest(dest)?, ptr }
        }
        "call" => {
            cur.expect_word("i32")?;
            let callee = cur.expect_global()?;
            cur.expect_punct('(')?;
            let mut args = Vec::new();
            if !cur.eat_punct(')') {
                loop {
                    cur.expect_word("i32")?;
                    args.push(parse_operand(&mut cur)?);
                    if cur.eat_punct(')') {
                        break;
                    }
                    cur.expect_punct(',')?;
                }
            }
            RawInstruction::Call { dest, callee, args }
        }
        "br" => {
            no_dest(&dest)?;
            match cur.peek() {
                Some(Tok::Word(w)) if w == "label" => RawInstruction::Br(parse_label_ref(&mut cur)?),
                _ => {
                    cur.expect_word("i1")?;
                    let cond = parse_operand(&mut cur)?;
                    cur.expect_punct(',')?;
                    let on_true = parse_label_ref(&mut cur)?;
                    cur.expect_punct(',')?;
                    let on_false = parse_label_ref(&mut cur)?;
                    RawInstruction::CondBr { cond, on_true, on_false }
                }
            }
        }
        "ret" => {
            no_dest(&dest)?;
            cur.expect_word("i32")?;
            RawInstruction::Ret(parse_operand(&mut cur)?)
        }
        other => return Err(format!("unsupported instruction '{other}'")),
    };
    cur.finish()?;
    Ok(inst)
}

fn parse_signature(cur: &mut LineCursor, named: bool) -> Result<(String, Vec<String>), String> {
    cur.expect_word("i32")?;
    let name = cur.expect_global()?;
    cur.expect_punct('(')?;
    let mut params = Vec::new();
    if !cur.eat_punct(')') {
        loop {
            cur.expect_word("i32")?;
            if named {
                params.push(cur.expect_local()?);
            } else {
                if let Some(Tok::Local(_)) = cur.peek() {
                    cur.next();
                }
                params.push(String::new());
            }
            if cur.eat_punct(')') {
                break;
            }
            cur.expect_punct(',')?;
        }
    }
    Ok((name, params))
}

struct RawBlock {
    label: Option<String>,
    line: usize,
    instructions: Vec<(usize, RawInstruction)>,
}

struct RawFunction {
    name: String,
    params: Vec<String>,
    line: usize,
    blocks: Vec<RawBlock>,
}

/// Parses a module. Structural rules are checked here: unique function
/// names, single definition of every register, a terminator closing every
/// block and nothing after it, existing branch targets, and callees that
/// are defined or declared.
pub fn parse_ir(text: &str) -> Result<IrModule, IrParseError> {
    let err = |line: usize, detail: String| IrParseError { line, detail };
    let mut declares: Vec<(usize, Declare)> = Vec::new();
    let mut raw_functions: Vec<RawFunction> = Vec::new();
    let mut current: Option<RawFunction> = None;

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let toks = lex_line(raw_line).map_err(|d| err(line_no, d))?;
        if toks.is_empty() {
            continue;
        }
        match current.as_mut() {
            None => match &toks[0] {
                Tok::Word(w) if w == "declare" => {
                    let mut cur = LineCursor { toks, at: 1 };
                    let (name, params) = parse_signature(&mut cur, false).map_err(|d| err(line_no, d))?;
                    cur.finish().map_err(|d| err(line_no, d))?;
                    declares.push((line_no, Declare { name, params: params.len() }));
                }
                Tok::Word(w) if w == "define" => {
                    let mut cur = LineCursor { toks, at: 1 };
                    let (name, params) = parse_signature(&mut cur, true).map_err(|d| err(line_no, d))?;
                    cur.expect_punct('{').map_err(|d| err(line_no, d))?;
                    cur.finish().map_err(|d| err(line_no, d))?;
                    current = Some(RawFunction { name, params, line: line_no, blocks: Vec::new() });
                }
                Tok::Word(w) if w == "source_filename" || w == "target" => {}
                other => return Err(err(line_no, format!("unexpected {} outside a function", describe(Some(other))))),
            },
            Some(function) => {
                if toks == [Tok::Punct('}')] {
                    raw_functions.push(current.take().expect("inside a function"));
                    continue;
                }
                if let [name, Tok::Punct(':')] = toks.as_slice() {
                    let label = match name {
                        Tok::Word(w) => w.clone(),
                        Tok::Int(v) => v.to_string(),
                        other => return Err(err(line_no, format!("invalid label {}", describe(Some(other))))),
                    };
                    if let Some(last) = function.blocks.last() {
                        let closed = last.instructions.last().is_some_and(|(_, i)| i.is_terminator());
                        if !closed {
                            return Err(err(line_no, format!("block before label {label} has no terminator")));
                        }
                    }
                    function.blocks.push(RawBlock { label: Some(label), line: line_no, instructions: Vec::new() });
                    continue;
                }
                let inst = parse_instruction(toks).map_err(|d| err(line_no, d))?;
                if function.blocks.is_empty() {
                    function.blocks.push(RawBlock { label: None, line: line_no, instructions: Vec::new() });
                }
                let block = function.blocks.last_mut().expect("a block");
                if block.instructions.last().is_some_and(|(_, i)| i.is_terminator()) {
                    return Err(err(line_no, "instruction after block terminator".to_string()));
                }
                block.instructions.push((line_no, inst));
            }
        }
    }
    if let Some(function) = current {
        return Err(err(function.line, format!("function @{} is not closed", function.name)));
    }

    let mut names: HashMap<&str, usize> = HashMap::new();
    for (line, d) in &declares {
        names.insert(&d.name, *line);
    }
    for f in &raw_functions {
        if names.insert(&f.name, f.line).is_some() {
            return Err(err(f.line, format!("redefinition of @{}", f.name)));
        }
    }

    let mut module = IrModule {
        declares: declares.into_iter().map(|(_, d)| d).collect(),
        functions: Vec::new(),
    };
    let index_of: HashMap<String, usize> =
        raw_functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect();
    for raw in raw_functions {
        let function = resolve_function(raw, &index_of, &module.declares)?;
        module.functions.push(function);
    }
    Ok(module)
}

struct Registers {
    index: HashMap<String, usize>,
    names: Vec<String>,
    defined: Vec<bool>,
    first_use: Vec<usize>,
}

impl Registers {
    fn slot(&mut self, name: &str, line: usize) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.to_string(), i);
        self.names.push(name.to_string());
        self.defined.push(false);
        self.first_use.push(line);
        i
    }

    fn define(&mut self, name: &str, line: usize) -> Result<usize, IrParseError> {
        let i = self.slot(name, line);
        if self.defined[i] {
            return Err(IrParseError { line, detail: format!("multiple definition of %{name}") });
        }
        self.defined[i] = true;
        Ok(i)
    }

    fn operand(&mut self, raw: RawOperand, line: usize) -> Operand {
        match raw {
            RawOperand::Const(v) => Operand::Const(v),
            RawOperand::Local(name) => Operand::Reg(self.slot(&name, line)),
        }
    }
}

fn resolve_function(
    raw: RawFunction,
    index_of: &HashMap<String, usize>,
    declares: &[Declare],
) -> Result<IrFunction, IrParseError> {
    let err = |line: usize, detail: String| IrParseError { line, detail };
    let mut regs = Registers { index: HashMap::new(), names: Vec::new(), defined: Vec::new(), first_use: Vec::new() };
    for p in &raw.params {
        regs.define(p, raw.line)?;
    }
    let mut labels: HashMap<String, usize> = HashMap::new();
    for (i, b) in raw.blocks.iter().enumerate() {
        if let Some(label) = &b.label {
            if labels.insert(label.clone(), i).is_some() {
                return Err(err(b.line, format!("duplicate label {label}")));
            }
        }
    }
    if raw.blocks.is_empty() {
        return Err(err(raw.line, format!("function @{} has no body", raw.name)));
    }

    let mut blocks = Vec::with_capacity(raw.blocks.len());
    for raw_block in raw.blocks {
        let label_name = raw_block.label.clone().unwrap_or_else(|| "entry".to_string());
        let mut instructions = Vec::new();
        let mut terminator = None;
        for (line, inst) in raw_block.instructions {
            let target = |name: String| {
                labels.get(&name).copied().ok_or_else(|| err(line, format!("unknown label %{name}")))
            };
            match inst {
                RawInstruction::Binary { dest, op, lhs, rhs } => {
                    let lhs = regs.operand(lhs, line);
                    let rhs = regs.operand(rhs, line);
                    let dest = regs.define(&dest, line)?;
                    instructions.push(Instruction::Binary { dest, op, lhs, rhs });
                }
                RawInstruction::IcmpNe { dest, lhs, rhs } => {
                    let lhs = regs.operand(lhs, line);
                    let rhs = regs.operand(rhs, line);
                    let dest = regs.define(&dest, line)?;
                    instructions.push(Instruction::IcmpNe { dest, lhs, rhs });
                }
                RawInstruction::Alloca { dest } => {
                    let dest = regs.define(&dest, line)?;
                    instructions.push(Instruction::Alloca { dest });
                }
                RawInstruction::Store { value, ptr } => {
                    let value = regs.operand(value, line);
                    let ptr = regs.operand(ptr, line);
                    instructions.push(Instruction::Store { value, ptr });
                }
                RawInstruction::Load { dest, ptr } => {
                    let ptr = regs.operand(ptr, line);
                    let dest = regs.define(&dest, line)?;
                    instructions.push(Instruction::Load { dest, ptr });
                }
                RawInstruction::Call { dest, callee, args } => {
                    let callee = match index_of.get(&callee) {
                        Some(&i) => Callee::Defined(i),
                        None if declares.iter().any(|d| d.name == callee) => Callee::Declared(callee),
                        None => return Err(err(line, format!("call to undefined function @{callee}"))),
                    };
                    let args = args.into_iter().map(|a| regs.operand(a, line)).collect();
                    let dest = match dest {
                        Some(d) => Some(regs.define(&d, line)?),
                        None => None,
                    };
                    instructions.push(Instruction::Call { dest, callee, args });
                }
                RawInstruction::Br(label) => terminator = Some(Terminator::Br(target(label)?)),
                RawInstruction::CondBr { cond, on_true, on_false } => {
                    let cond = regs.operand(cond, line);
                    terminator = Some(Terminator::CondBr { cond, on_true: target(on_true)?, on_false: target(on_false)? });
                }
                RawInstruction::Ret(value) => terminator = Some(Terminator::Ret(regs.operand(value, line))),
            }
        }
        let terminator = terminator
            .ok_or_else(|| err(raw_block.line, format!("block {label_name} has no terminator")))?;
        blocks.push(Block { label: raw_block.label, instructions, terminator });
    }
    if let Some(i) = regs.defined.iter().position(|d| !d) {
        return Err(err(regs.first_use[i], format!("use of undefined value %{}", regs.names[i])));
    }
    Ok(IrFunction { name: raw.name, params: raw.params, blocks, registers: regs.names })
}

// ---------------------------------------------------------------------------
// Execution

/// Supplier of integers for `_read`.
pub trait IntSource {
    fn next_int(&mut self) -> Result<Option<i32>, io::Error>;
}

impl<I: Iterator<Item = i32>> IntSource for I {
    fn next_int(&mut self) -> Result<Option<i32>, io::Error> {
        Ok(self.next())
    }
}

/// Reads whitespace-separated decimal integers lazily from a reader. Reading
/// stops at end of input or at the first token that is not an integer.
pub struct TextInput<R> {
    reader: R,
    pending: std::collections::VecDeque<String>,
    stopped: bool,
}

impl<R: BufRead> TextInput<R> {
    pub fn new(reader: R) -> Self {
        TextInput { reader, pending: Default::default(), stopped: false }
    }
}

impl<R: BufRead> IntSource for TextInput<R> {
    fn next_int(&mut self) -> Result<Option<i32>, io::Error> {
        while self.pending.is_empty() && !self.stopped {
            let mut line = String::new();
            if self.reader.read_line(&mut line)? == 0 {
                self.stopped = true;
            }
            self.pending.extend(line.split_whitespace().map(str::to_string));
        }
        match self.pending.pop_front() {
            Some(word) => match word.parse::<i32>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => {
                    self.stopped = true;
                    self.pending.clear();
                    Ok(None)
                }
            },
            None => Ok(None),
        }
    }
}

/// Receiver of `_write` values.
pub trait IntSink {
    fn write_int(&mut self, value: i32) -> Result<(), io::Error>;
}

impl IntSink for Vec<i32> {
    fn write_int(&mut self, value: i32) -> Result<(), io::Error> {
        self.push(value);
        Ok(())
    }
}

/// Writes each value as a decimal line.
pub struct LineOutput<W>(pub W);

impl<W: Write> IntSink for LineOutput<W> {
    fn write_int(&mut self, value: i32) -> Result<(), io::Error> {
        writeln!(self.0, "{value}")?;
        self.0.flush()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_depth: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    I32(i32),
    I1(bool),
    Slot(usize),
}

struct Frame {
    function: usize,
    block: usize,
    ip: usize,
    regs: Vec<Option<Value>>,
    slot_base: usize,
    /// Caller register receiving the return value.
    result_reg: Option<usize>,
}

impl Frame {
    fn new(module: &IrModule, function: usize, args: &[i32], slot_base: usize, result_reg: Option<usize>) -> Frame {
        let f = &module.functions[function];
        let mut regs = vec![None; f.registers.len()];
        for (reg, &arg) in regs.iter_mut().zip(args) {
            *reg = Some(Value::I32(arg));
        }
        Frame { function, block: 0, ip: 0, regs, slot_base, result_reg }
    }

    fn value(&self, op: Operand) -> Result<Value, RuntimeError> {
        match op {
            Operand::Const(v) => Ok(Value::I32(v)),
            Operand::Reg(r) => self.regs[r].ok_or(RuntimeError::InvalidValue("use of a value before its definition")),
        }
    }

    fn int(&self, op: Operand) -> Result<i32, RuntimeError> {
        match self.value(op)? {
            Value::I32(v) => Ok(v),
            _ => Err(RuntimeError::InvalidValue("expected an i32 value")),
        }
    }
}

fn binary(op: BinOp, a: i32, b: i32) -> Result<i32, RuntimeError> {
    Ok(match op {
        BinOp::Add => a.wrapping_add(b),
        BinOp::Sub => a.wrapping_sub(b),
        BinOp::Mul => a.wrapping_mul(b),
        BinOp::SDiv => {
            if b == 0 {
                return Err(RuntimeError::DivisionByZero);
            }
            a.checked_div(b).ok_or(RuntimeError::DivisionOverflow)?
        }
    })
}

/// Executes `entry` with `args` and returns its result.
pub fn run(
    module: &IrModule,
    entry: &str,
    args: &[i32],
    input: &mut dyn IntSource,
    output: &mut dyn IntSink,
) -> Result<i32, RuntimeError> {
    run_with_limits(module, entry, args, input, output, Limits::default())
}

pub fn run_with_limits(
    module: &IrModule,
    entry: &str,
    args: &[i32],
    input: &mut dyn IntSource,
    output: &mut dyn IntSink,
    limits: Limits,
) -> Result<i32, RuntimeError> {
    let entry = entry.strip_prefix('@').unwrap_or(entry);
    let start = module
        .function_index(entry)
        .ok_or_else(|| RuntimeError::UndefinedFunction(entry.to_string()))?;
    check_arity(&module.functions[start], args.len())?;

    let mut slots: Vec<Option<i32>> = Vec::new();
    let mut frames = vec![Frame::new(module, start, args, 0, None)];

    loop {
        let frame = frames.last_mut().expect("an active frame");
        let function = &module.functions[frame.function];
        let block = &function.blocks[frame.block];

        if frame.ip < block.instructions.len() {
            let inst = &block.instructions[frame.ip];
            frame.ip += 1;
            match inst {
                Instruction::Binary { dest, op, lhs, rhs } => {
                    let v = binary(*op, frame.int(*lhs)?, frame.int(*rhs)?)?;
                    frame.regs[*dest] = Some(Value::I32(v));
                }
                Instruction::IcmpNe { dest, lhs, rhs } => {
                    let v = frame.int(*lhs)? != frame.int(*rhs)?;
                    frame.regs[*dest] = Some(Value::I1(v));
                }
                Instruction::Alloca { dest } => {
                    slots.push(None);
                    frame.regs[*dest] = Some(Value::Slot(slots.len() - 1));
                }
                Instruction::Store { value, ptr } => {
                    let v = frame.int(*value)?;
                    let slot = live_slot(frame, *ptr, slots.len())?;
                    slots[slot] = Some(v);
                }
                Instruction::Load { dest, ptr } => {
                    let slot = live_slot(frame, *ptr, slots.len())?;
                    let v = slots[slot].ok_or(RuntimeError::InvalidValue("load from an uninitialized slot"))?;
                    frame.regs[*dest] = Some(Value::I32(v));
                }
                Instruction::Call { dest, callee, args } => {
                    let values = args.iter().map(|a| frame.int(*a)).collect::<Result<Vec<_>, _>>()?;
                    match callee {
                        Callee::Defined(index) => {
                            check_arity(&module.functions[*index], values.len())?;
                            if frames.len() >= limits.max_depth {
                                return Err(RuntimeError::CallDepthExceeded);
                            }
                            let callee_frame = Frame::new(module, *index, &values, slots.len(), *dest);
                            frames.push(callee_frame);
                        }
                        Callee::Declared(name) => {
                            let v = call_builtin(name, &values, input, output)?;
                            if let Some(dest) = dest {
                                frame.regs[*dest] = Some(Value::I32(v));
                            }
                        }
                    }
                }
            }
            continue;
        }

        match block.terminator {
            Terminator::Br(target) => {
                frame.block = target;
                frame.ip = 0;
            }
            Terminator::CondBr { cond, on_true, on_false } => {
                let taken = match frame.value(cond)? {
                    Value::I1(b) => b,
                    Value::I32(v) => v != 0,
                    Value::Slot(_) => return Err(RuntimeError::InvalidValue("branch on a pointer")),
                };
                frame.block = if taken { on_true } else { on_false };
                frame.ip = 0;
            }
            Terminator::Ret(value) => {
                let v = frame.int(value)?;
                let done = frames.pop().expect("returning frame");
                slots.truncate(done.slot_base);
                match frames.last_mut() {
                    None => return Ok(v),
                    Some(caller) => {
                        if let Some(reg) = done.result_reg {
                            caller.regs[reg] = Some(Value::I32(v));
                        }
                    }
                }
            }
        }
    }
}

fn check_arity(function: &IrFunction, got: usize) -> Result<(), RuntimeError> {
    if function.params.len() == got {
        Ok(())
    } else {
        Err(RuntimeError::ArgumentCount { name: function.name.clone(), expected: function.params.len(), got })
    }
}

fn live_slot(frame: &Frame, ptr: Operand, live: usize) -> Result<usize, RuntimeError> {
    match frame.value(ptr)? {
        Value::Slot(s) if s >= frame.slot_base && s < live => Ok(s),
        Value::Slot(_) => Err(RuntimeError::InvalidValue("access to a slot of another activation")),
        _ => Err(RuntimeError::InvalidValue("expected a pointer")),
    }
}

fn call_builtin(
    name: &str,
    args: &[i32],
    input: &mut dyn IntSource,
    output: &mut dyn IntSink,
) -> Result<i32, RuntimeError> {
    let expect_one = || {
        if args.len() == 1 {
            Ok(args[0])
        } else {
            Err(RuntimeError::ArgumentCount { name: name.to_string(), expected: 1, got: args.len() })
        }
    };
    match name {
        "_read" => {
            expect_one()?;
            input.next_int()?.ok_or(RuntimeError::InputExhausted)
        }
        "_write" => {
            let v = expect_one()?;
            output.write_int(v)?;
            Ok(v)
        }
        other => Err(RuntimeError::UndefinedFunction(other.to_string())),
    }
}
