//! Round-trip check for the Verilog emitter: an independent parser and
//! evaluator for the emitted subset re-simulates the text and must match the
//! netlist simulator on seeded random vectors, in both emission modes.

use axop::axmodel::{apply_config, AxoConfig, TiePolarity};
use axop::netlist::{Netlist, Simulator};
use axop::opgen::{gen_signed_mul_bw, gen_unsigned_adder};
use axop::verilog::{emit_verilog, VerilogMode};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::collections::HashMap;

// ---------------------------------------------------------------------------
// Tiny Verilog-subset reader: module ports, wires, continuous assigns with
// ~ & ^ | ?: operators, LUT6/CARRY4 instances with concatenation pins.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(String),
    Symbol(char),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        match c {
            '/' if matches!(chars.peek(), Some((_, '/'))) => {
                for (_, n) in chars.by_ref() {
                    if n == '\n' {
                        break;
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                word.push(c);
                while let Some((_, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || *n == '_' {
                        word.push(*n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Ident(word));
            }
            c if c.is_ascii_digit() => {
                // Covers plain integers and sized literals like 64'hFF or 1'b0.
                let mut word = String::new();
                word.push(c);
                while let Some((_, n)) = chars.peek() {
                    if n.is_ascii_alphanumeric() || *n == '\'' {
                        word.push(*n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token::Number(word));
            }
            c if c.is_whitespace() => {}
            c => tokens.push(Token::Symbol(c)),
        }
    }
    tokens
}

#[derive(Debug, Clone)]
enum Expr {
    Const(bool),
    Signal(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Mux(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug)]
struct Lut6Inst {
    init: u64,
    pins: Vec<Expr>,
    output: String,
}

#[derive(Debug)]
struct Carry4Inst {
    ci: Expr,
    di: Vec<Expr>,
    s: Vec<Expr>,
    o: Vec<String>,
    co: Vec<String>,
}

#[derive(Debug, Default)]
struct Module {
    inputs: Vec<(String, usize)>,
    outputs: Vec<(String, usize)>,
    assigns: Vec<(String, Expr)>,
    luts: Vec<Lut6Inst>,
    carries: Vec<Carry4Inst>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        self.pos += 1;
        t
    }

    fn expect_symbol(&mut self, c: char) {
        match self.next() {
            Token::Symbol(s) if s == c => {}
            other => panic!("expected {c:?}, got {other:?} at {}", self.pos),
        }
    }

    fn expect_ident(&mut self) -> String {
        match self.next() {
            Token::Ident(w) => w,
            other => panic!("expected identifier, got {other:?}"),
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if let Some(Token::Ident(w)) = self.peek() {
            if w == word {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn eat_symbol(&mut self, c: char) -> bool {
        if let Some(Token::Symbol(s)) = self.peek() {
            if *s == c {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    /// Port width from `[msb:0]`.
    fn parse_range(&mut self) -> usize {
        self.expect_symbol('[');
        let msb = match self.next() {
            Token::Number(n) => n.parse::<usize>().unwrap(),
            other => panic!("expected msb, got {other:?}"),
        };
        self.expect_symbol(':');
        match self.next() {
            Token::Number(n) => assert_eq!(n, "0"),
            other => panic!("expected 0, got {other:?}"),
        }
        self.expect_symbol(']');
        msb + 1
    }

    fn parse_module(&mut self) -> Module {
        let mut module = Module::default();
        assert!(self.eat_ident("module"));
        let _name = self.expect_ident();
        self.expect_symbol('(');
        loop {
            if self.eat_ident("input") {
                let width = self.parse_range();
                let name = self.expect_ident();
                module.inputs.push((name, width));
            } else if self.eat_ident("output") {
                let width = self.parse_range();
                let name = self.expect_ident();
                module.outputs.push((name, width));
            } else {
                panic!("expected port direction at {}", self.pos);
            }
            if !self.eat_symbol(',') {
                break;
            }
        }
        self.expect_symbol(')');
        self.expect_symbol(';');

        loop {
            if self.eat_ident("endmodule") {
                break;
            } else if self.eat_ident("wire") {
                loop {
                    let _ = self.expect_ident();
                    if !self.eat_symbol(',') {
                        break;
                    }
                }
                self.expect_symbol(';');
            } else if self.eat_ident("assign") {
                let target = self.parse_signal_name();
                self.expect_symbol('=');
                let expr = self.parse_expr();
                self.expect_symbol(';');
                module.assigns.push((target, expr));
            } else if self.eat_ident("LUT6") {
                module.luts.push(self.parse_lut6());
            } else if self.eat_ident("CARRY4") {
                module.carries.push(self.parse_carry4());
            } else {
                panic!("unexpected token {:?}", self.peek());
            }
        }
        module
    }

    fn parse_signal_name(&mut self) -> String {
        let base = self.expect_ident();
        if self.eat_symbol('[') {
            let index = match self.next() {
                Token::Number(n) => n,
                other => panic!("expected index, got {other:?}"),
            };
            self.expect_symbol(']');
            format!("{base}[{index}]")
        } else {
            base
        }
    }

    fn parse_literal_bit(word: &str) -> Option<bool> {
        match word {
            "1'b0" => Some(false),
            "1'b1" => Some(true),
            _ => None,
        }
    }

    // Precedence: ?: lowest, then |, ^, &, unary ~, primary.
    fn parse_expr(&mut self) -> Expr {
        let condition = self.parse_or();
        if self.eat_symbol('?') {
            let on_true = self.parse_expr();
            self.expect_symbol(':');
            let on_false = self.parse_expr();
            Expr::Mux(Box::new(condition), Box::new(on_true), Box::new(on_false))
        } else {
            condition
        }
    }

    fn parse_or(&mut self) -> Expr {
        let mut left = self.parse_xor();
        while self.eat_symbol('|') {
            let right = self.parse_xor();
            left = Expr::Or(Box::new(left), Box::new(right));
        }
        left
    }

    fn parse_xor(&mut self) -> Expr {
        let mut left = self.parse_and();
        while self.eat_symbol('^') {
            let right = self.parse_and();
            left = Expr::Xor(Box::new(left), Box::new(right));
        }
        left
    }

    fn parse_and(&mut self) -> Expr {
        let mut left = self.parse_unary();
        while self.eat_symbol('&') {
            let right = self.parse_unary();
            left = Expr::And(Box::new(left), Box::new(right));
        }
        left
    }

    fn parse_unary(&mut self) -> Expr {
        if self.eat_symbol('~') {
            Expr::Not(Box::new(self.parse_unary()))
        } else if self.eat_symbol('(') {
            let inner = self.parse_expr();
            self.expect_symbol(')');
            inner
        } else {
            match self.peek().cloned() {
                Some(Token::Number(word)) => {
                    self.pos += 1;
                    Expr::Const(Self::parse_literal_bit(&word).expect("bit literal"))
                }
                Some(Token::Ident(_)) => Expr::Signal(self.parse_signal_name()),
                other => panic!("unexpected expression token {other:?}"),
            }
        }
    }

    fn parse_lut6(&mut self) -> Lut6Inst {
        self.expect_symbol('#');
        self.expect_symbol('(');
        self.expect_symbol('.');
        assert_eq!(self.expect_ident(), "INIT");
        self.expect_symbol('(');
        let init = match self.next() {
            Token::Number(word) => {
                let hex = word.strip_prefix("64'h").expect("64'h literal");
                u64::from_str_radix(hex, 16).unwrap()
            }
            other => panic!("expected INIT literal, got {other:?}"),
        };
        self.expect_symbol(')');
        self.expect_symbol(')');
        let _inst = self.expect_ident();
        self.expect_symbol('(');
        let mut pins: Vec<(String, Expr)> = Vec::new();
        loop {
            self.expect_symbol('.');
            let pin = self.expect_ident();
            self.expect_symbol('(');
            let value = self.parse_expr();
            self.expect_symbol(')');
            pins.push((pin, value));
            if !self.eat_symbol(',') {
                break;
            }
        }
        self.expect_symbol(')');
        self.expect_symbol(';');
        let mut inputs = vec![Expr::Const(false); 6];
        let mut output = String::new();
        for (pin, value) in pins {
            if let Some(rest) = pin.strip_prefix('I') {
                inputs[rest.parse::<usize>().unwrap()] = value;
            } else if pin == "O" {
                output = match value {
                    Expr::Signal(name) => name,
                    other => panic!("LUT output must be a signal, got {other:?}"),
                };
            }
        }
        Lut6Inst {
            init,
            pins: inputs,
            output,
        }
    }

    /// `{msb, ..., lsb}` concatenation or a single expression.
    fn parse_pin_bus(&mut self, value: Expr) -> Vec<Expr> {
        match value {
            Expr::Signal(_) | Expr::Const(_) => vec![value],
            other => panic!("unexpected bus expression {other:?}"),
        }
    }

    fn parse_carry4(&mut self) -> Carry4Inst {
        let _inst = self.expect_ident();
        self.expect_symbol('(');
        let mut ci = Expr::Const(false);
        let mut di = Vec::new();
        let mut s = Vec::new();
        let mut o = Vec::new();
        let mut co = Vec::new();
        loop {
            self.expect_symbol('.');
            let pin = self.expect_ident();
            self.expect_symbol('(');
            if self.eat_symbol('{') {
                // MSB-first concatenation.
                let mut parts = Vec::new();
                loop {
                    parts.push(self.parse_expr());
                    if !self.eat_symbol(',') {
                        break;
                    }
                }
                self.expect_symbol('}');
                parts.reverse(); // store LSB-first
                match pin.as_str() {
                    "DI" => di = parts,
                    "S" => s = parts,
                    "O" => {
                        o = parts
                            .into_iter()
                            .map(|e| match e {
                                Expr::Signal(name) => name,
                                other => panic!("O pin must be signals, got {other:?}"),
                            })
                            .collect()
                    }
                    "CO" => {
                        co = parts
                            .into_iter()
                            .map(|e| match e {
                                Expr::Signal(name) => name,
                                other => panic!("CO pin must be signals, got {other:?}"),
                            })
                            .collect()
                    }
                    other => panic!("unexpected bus pin {other}"),
                }
            } else {
                let value = self.parse_expr();
                match pin.as_str() {
                    "CI" => ci = value,
                    "CYINIT" => {
                        // Always emitted as 1'b0; the chain input is CI.
                        let _ = self.parse_pin_bus(value);
                    }
                    other => panic!("unexpected scalar pin {other}"),
                }
            }
            self.expect_symbol(')');
            if !self.eat_symbol(',') {
                break;
            }
        }
        self.expect_symbol(')');
        self.expect_symbol(';');
        Carry4Inst { ci, di, s, o, co }
    }
}

fn eval_expr(expr: &Expr, values: &HashMap<String, bool>) -> Option<bool> {
    match expr {
        Expr::Const(b) => Some(*b),
        Expr::Signal(name) => values.get(name).copied(),
        Expr::Not(inner) => eval_expr(inner, values).map(|b| !b),
        Expr::And(l, r) => Some(eval_expr(l, values)? && eval_expr(r, values)?),
        Expr::Or(l, r) => Some(eval_expr(l, values)? || eval_expr(r, values)?),
        Expr::Xor(l, r) => Some(eval_expr(l, values)? ^ eval_expr(r, values)?),
        Expr::Mux(c, t, f) => {
            if eval_expr(c, values)? {
                eval_expr(t, values)
            } else {
                eval_expr(f, values)
            }
        }
    }
}

/// Unknown-tolerant sweeps until every node settles.
fn evaluate_module(module: &Module, input_bits: &[bool]) -> Vec<bool> {
    let mut values: HashMap<String, bool> = HashMap::new();
    let mut cursor = 0;
    for (name, width) in &module.inputs {
        for k in 0..*width {
            values.insert(format!("{name}[{k}]"), input_bits[cursor]);
            cursor += 1;
        }
    }
    assert_eq!(cursor, input_bits.len());

    let node_count = module.assigns.len() + module.luts.len() + module.carries.len();
    for _round in 0..=node_count {
        let mut progressed = false;
        for (target, expr) in &module.assigns {
            if !values.contains_key(target) {
                if let Some(bit) = eval_expr(expr, &values) {
                    values.insert(target.clone(), bit);
                    progressed = true;
                }
            }
        }
        for lut in &module.luts {
            if !values.contains_key(&lut.output) {
                let bits: Option<Vec<bool>> =
                    lut.pins.iter().map(|p| eval_expr(p, &values)).collect();
                if let Some(bits) = bits {
                    let index: u32 = bits
                        .iter()
                        .enumerate()
                        .map(|(i, b)| if *b { 1 << i } else { 0 })
                        .sum();
                    values.insert(lut.output.clone(), (lut.init >> index) & 1 == 1);
                    progressed = true;
                }
            }
        }
        for carry in &module.carries {
            let done = carry
                .o
                .iter()
                .chain(carry.co.iter())
                .all(|n| values.contains_key(n));
            if done {
                continue;
            }
            let ci = eval_expr(&carry.ci, &values);
            let di: Option<Vec<bool>> = carry.di.iter().map(|p| eval_expr(p, &values)).collect();
            let s: Option<Vec<bool>> = carry.s.iter().map(|p| eval_expr(p, &values)).collect();
            if let (Some(ci), Some(di), Some(s)) = (ci, di, s) {
                let mut chain = ci;
                for slot in 0..4 {
                    let o = s[slot] ^ chain;
                    let c = if s[slot] { chain } else { di[slot] };
                    values.insert(carry.o[slot].clone(), o);
                    values.insert(carry.co[slot].clone(), c);
                    chain = c;
                }
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }

    let mut outputs = Vec::new();
    for (name, width) in &module.outputs {
        for k in 0..*width {
            let key = format!("{name}[{k}]");
            outputs.push(*values.get(&key).unwrap_or_else(|| {
                panic!("output {key} never settled");
            }));
        }
    }
    outputs
}

fn check_roundtrip(netlist: &Netlist, vectors: usize, seed: u64) {
    let sim = Simulator::new(netlist).unwrap();
    let width = netlist.input_width();
    for mode in [VerilogMode::Generic, VerilogMode::VendorPrimitives] {
        let text = emit_verilog(netlist, mode).unwrap();
        let mut parser = Parser {
            tokens: tokenize(&text),
            pos: 0,
        };
        let module = parser.parse_module();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for round in 0..vectors {
            let bits: Vec<bool> = (0..width).map(|_| rng.next_u32() & 1 == 1).collect();
            let expected = sim.eval_bits(&bits).unwrap();
            let got = evaluate_module(&module, &bits);
            assert_eq!(
                got, expected,
                "{} mode {mode:?} vector {round}: inputs {bits:?}",
                netlist.name
            );
        }
    }
}

#[test]
fn adder_roundtrips_both_modes() {
    check_roundtrip(&gen_unsigned_adder(4).unwrap(), 1000, 11);
}

#[test]
fn odd_width_adder_roundtrips() {
    check_roundtrip(&gen_unsigned_adder(5).unwrap(), 500, 12);
}

#[test]
fn multiplier_roundtrips_both_modes() {
    check_roundtrip(&gen_signed_mul_bw(3, 3).unwrap(), 1000, 13);
}

#[test]
fn pruned_variants_roundtrip() {
    let base = gen_unsigned_adder(6).unwrap();
    for config in ["101011", "000000", "010101"] {
        let pruned =
            apply_config(&base, &AxoConfig::parse(config).unwrap(), TiePolarity::Zero).unwrap();
        check_roundtrip(&pruned, 300, 14);
    }
    let mul = gen_signed_mul_bw(2, 3).unwrap();
    let pruned = apply_config(&mul, &AxoConfig::parse("1010011").unwrap(), TiePolarity::Zero).unwrap();
    check_roundtrip(&pruned, 300, 15);
}
