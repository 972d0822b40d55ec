use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use petit::diagnostics::Phase;
use petit::irvm;

create_exception!(petit_py, PetitError, PyException);

fn phase_name(phase: Phase) -> &'static str {
    match phase {
        Phase::Lexical => "lexical",
        Phase::Syntax => "syntax",
        Phase::Semantic => "semantic",
        Phase::Runtime => "runtime",
    }
}

#[pyclass(name = "Token", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyToken {
    kind: String,
    lexeme: String,
    line: u32,
    column: u32,
}

#[pymethods]
impl PyToken {
    fn __repr__(&self) -> String {
        format!("Token({}, {:?}, {}:{})", self.kind, self.lexeme, self.line, self.column)
    }
}

fn kind_name(kind: petit::TokenKind) -> &'static str {
    use petit::TokenKind::*;
    match kind {
        Identifier => "IDENTIFIER",
        Natural => "NATURAL",
        Decimal => "DECIMAL",
        StrLit => "STRLIT",
        Integer => "INTEGER",
        Double => "DOUBLE",
        If => "IF",
        Then => "THEN",
        Else => "ELSE",
        LParen => "LPAREN",
        RParen => "RPAREN",
        Equals => "EQUALS",
        Comma => "COMMA",
        Star => "STAR",
        Slash => "SLASH",
        Plus => "PLUS",
        Minus => "MINUS",
        EndOfInput => "END_OF_INPUT",
    }
}

impl From<&petit::Token> for PyToken {
    fn from(t: &petit::Token) -> Self {
        PyToken { kind: kind_name(t.kind).to_string(), lexeme: t.lexeme.clone(), line: t.pos.line, column: t.pos.column }
    }
}

#[pyclass(name = "Diagnostic", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct PyDiagnostic {
    phase: &'static str,
    line: Option<u32>,
    column: Option<u32>,
    message: String,
    text: String,
}

#[pymethods]
impl PyDiagnostic {
    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!("Diagnostic({:?})", self.text)
    }
}

impl From<&petit::Diagnostic> for PyDiagnostic {
    fn from(d: &petit::Diagnostic) -> Self {
        PyDiagnostic {
            phase: phase_name(d.phase),
            line: d.pos.map(|p| p.line),
            column: d.pos.map(|p| p.column),
            message: d.message.clone(),
            text: d.to_string(),
        }
    }
}

fn to_py_error(diagnostics: &[petit::Diagnostic]) -> PyErr {
    let text: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
    PetitError::new_err(text.join("\n"))
}

fn failure(f: petit::Failure) -> PyErr {
    to_py_error(&f.diagnostics)
}

/// Returns the tokens (END_OF_INPUT included) and lexical diagnostics.
#[pyfunction]
fn tokenize(source: &str) -> (Vec<PyToken>, Vec<PyDiagnostic>) {
    let (tokens, diagnostics) = petit::tokenize(source);
    (tokens.iter().map(Into::into).collect(), diagnostics.iter().map(Into::into).collect())
}

#[pyfunction]
fn dump_tokens(source: &str) -> String {
    petit::dump_tokens(&petit::tokenize(source).0)
}

/// AST listing of a program; raises PetitError on lexical or syntax errors.
#[pyfunction]
fn parse(source: &str) -> PyResult<String> {
    let program = petit::parse_source(source).map_err(failure)?;
    Ok(petit::print_ast(&program, false))
}

/// Typed AST listing plus semantic diagnostics.
#[pyfunction]
fn check(source: &str) -> PyResult<(String, Vec<PyDiagnostic>)> {
    let (program, analysis) = petit::analyze_source(source).map_err(failure)?;
    Ok((petit::print_ast(&program, true), analysis.diagnostics.iter().map(Into::into).collect()))
}

#[pyfunction]
fn compile(source: &str) -> PyResult<String> {
    petit::compile_source(source).map_err(failure)
}

#[pyfunction]
fn calc(input: &str) -> PyResult<Vec<i32>> {
    petit::calc::eval_calc(input).map_err(|d| to_py_error(&d))
}

/// Compiles and runs a program's `main`, returning the values it wrote.
#[pyfunction]
#[pyo3(signature = (source, input = Vec::new()))]
fn run(source: &str, input: Vec<i32>) -> PyResult<Vec<i32>> {
    let ir = petit::compile_source(source).map_err(failure)?;
    let module = irvm::parse_ir(&ir).map_err(|e| PetitError::new_err(e.to_string()))?;
    let mut output = Vec::new();
    irvm::run(&module, "main", &[], &mut input.into_iter(), &mut output)
        .map_err(|e| PetitError::new_err(e.to_string()))?;
    Ok(output)
}

/// A parsed IR module that can be executed.
#[pyclass(name = "IrModule", frozen)]
pub struct PyIrModule {
    inner: irvm::IrModule,
}

#[pymethods]
impl PyIrModule {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        irvm::parse_ir(text)
            .map(|inner| PyIrModule { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn functions(&self) -> Vec<String> {
        self.inner.functions.iter().map(|f| f.name.clone()).collect()
    }

    #[getter]
    fn declares(&self) -> Vec<String> {
        self.inner.declares.iter().map(|d| d.name.clone()).collect()
    }

    /// Runs `entry`; returns `(result, written_values)`.
    #[pyo3(signature = (entry, args = Vec::new(), input = Vec::new()))]
    fn run(&self, entry: &str, args: Vec<i32>, input: Vec<i32>) -> PyResult<(i32, Vec<i32>)> {
        let mut output = Vec::new();
        let result = irvm::run(&self.inner, entry, &args, &mut input.into_iter(), &mut output)
            .map_err(|e| PetitError::new_err(e.to_string()))?;
        Ok((result, output))
    }
}

#[pymodule]
fn petit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PetitError", m.py().get_type::<PetitError>())?;
    m.add_class::<PyToken>()?;
    m.add_class::<PyDiagnostic>()?;
    m.add_class::<PyIrModule>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(dump_tokens, m)?)?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(calc, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
