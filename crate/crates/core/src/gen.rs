//! Seeded random closed programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenConfig {
    /// Exact number of primitive statements (skip, assignment, break, continue).
    pub statements: usize,
    pub variables: usize,
    /// Maximum nesting of `if` and `while`.
    pub max_depth: usize,
    /// Percent chance that a primitive inside a loop is `break` or `continue`.
    pub jump_percent: u32,
    /// Percent chance that a compound statement is a loop rather than a branch.
    pub loop_percent: u32,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { statements: 12, variables: 4, max_depth: 4, jump_percent: 10, loop_percent: 40 }
    }
}

impl GenConfig {
    pub fn with_statements(statements: usize) -> GenConfig {
        GenConfig { statements, ..GenConfig::default() }
    }

    pub fn small(statements: usize, variables: usize) -> GenConfig {
        GenConfig { statements, variables, max_depth: 3, ..GenConfig::default() }
    }
}

/// Variable names used by the generator: `a`, `b`, ... then `v26`, `v27`, ...
pub fn variable_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("v{i}")
    }
}

struct Generator<'a> {
    rng: ChaCha8Rng,
    config: &'a GenConfig,
    vars: Vec<String>,
    out: String,
}

/// Source text of a closed program with exactly `config.statements`
/// primitive statements. The same seed and config always give the same text.
pub fn generate(seed: u64, config: &GenConfig) -> String {
    let vars = (0..config.variables.max(1)).map(variable_name).collect();
    let mut g = Generator { rng: ChaCha8Rng::seed_from_u64(seed), config, vars, out: String::new() };
    g.block(config.statements.max(1), 0, false);
    g.out
}

impl Generator<'_> {
    fn block(&mut self, mut n: usize, depth: usize, in_loop: bool) {
        let mut first = true;
        while n > 0 {
            if !first {
                self.out.push_str("; ");
            }
            first = false;
            let compound = depth < self.config.max_depth && n >= 2 && self.rng.gen_ratio(1, 3);
            if !compound {
                self.primitive(in_loop);
                n -= 1;
                continue;
            }
            // A compound statement takes a random share of what is left,
            // capped so that long programs stay shallow and wide.
            let cap = (n / 2).clamp(2, 64).min(n);
            let size = self.rng.gen_range(1..=cap);
            if self.rng.gen_range(0..100) < self.config.loop_percent {
                self.out.push_str("while ");
                self.condition();
                self.out.push_str(" do ");
                self.block(size, depth + 1, true);
                self.out.push_str(" od");
                n -= size;
            } else {
                let size = size.max(2);
                let left = self.rng.gen_range(1..size);
                self.out.push_str("if ");
                self.condition();
                self.out.push_str(" then ");
                self.block(left, depth + 1, in_loop);
                self.out.push_str(" else ");
                self.block(size - left, depth + 1, in_loop);
                self.out.push_str(" fi");
                n -= size;
            }
        }
    }

    fn primitive(&mut self, in_loop: bool) {
        if in_loop && self.rng.gen_range(0..100) < self.config.jump_percent {
            self.out.push_str(if self.rng.gen_bool(0.5) { "break" } else { "continue" });
        } else if self.rng.gen_ratio(1, 8) {
            self.out.push_str("skip");
        } else {
            let target = self.vars.choose(&mut self.rng).unwrap().clone();
            self.out.push_str(&target);
            self.out.push_str(" := ");
            self.expr(2);
        }
    }

    fn operand(&mut self) {
        if self.rng.gen_ratio(3, 4) {
            let v = self.vars.choose(&mut self.rng).unwrap().clone();
            self.out.push_str(&v);
        } else {
            let k: u8 = self.rng.gen_range(0..10);
            self.out.push_str(&k.to_string());
        }
    }

    fn expr(&mut self, depth: usize) {
        match self.rng.gen_range(0..6) {
            0 | 1 if depth > 0 => {
                self.expr(depth - 1);
                self.out.push_str([" + ", " - ", " * "].choose(&mut self.rng).unwrap());
                self.operand();
            }
            2 if depth > 0 => {
                self.out.push('-');
                self.operand();
            }
            _ => self.operand(),
        }
    }

    fn condition(&mut self) {
        self.operand();
        self.out.push_str([" < ", " == ", " != ", " >= "].choose(&mut self.rng).unwrap());
        self.operand();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check_closed, parse};

    #[test]
    fn deterministic() {
        let c = GenConfig::default();
        assert_eq!(generate(7, &c), generate(7, &c));
        assert_ne!(generate(7, &c), generate(8, &c));
    }

    #[test]
    fn closed_with_exact_size() {
        for seed in 0..200 {
            let c = GenConfig { statements: 1 + (seed as usize % 30), variables: 3, ..GenConfig::default() };
            let src = generate(seed, &c);
            let ast = parse(&src).unwrap_or_else(|e| panic!("{src}: {e}"));
            assert!(check_closed(&ast), "{src}");
            assert_eq!(ast.statement_count(), c.statements, "{src}");
            assert!(ast.variables().len() <= 3);
        }
    }

    #[test]
    fn variable_names() {
        assert_eq!(variable_name(0), "a");
        assert_eq!(variable_name(25), "z");
        assert_eq!(variable_name(26), "v26");
    }
}
