use std::fmt::{self, Write};

use super::{Arg, Formula};

// Binding strength, higher binds tighter.
const LET: u8 = 0;
const EQUIV: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Let(..) => LET,
        Formula::Equiv(..) => EQUIV,
        Formula::Implies(..) => IMPLIES,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn write_at(out: &mut fmt::Formatter<'_>, f: &Formula, min: u8) -> fmt::Result {
    if level(f) < min {
        out.write_char('(')?;
        write_formula(out, f)?;
        out.write_char(')')
    } else {
        write_formula(out, f)
    }
}

fn write_binary(
    out: &mut fmt::Formatter<'_>,
    a: &Formula,
    op: &str,
    b: &Formula,
    lvl: u8,
    right_assoc: bool,
) -> fmt::Result {
    let (left_min, right_min) = if right_assoc { (lvl + 1, lvl) } else { (lvl, lvl + 1) };
    write_at(out, a, left_min)?;
    write!(out, " {op} ")?;
    write_at(out, b, right_min)
}

pub(super) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::True => out.write_str("T"),
        Formula::False => out.write_str("F"),
        Formula::Element(n) | Formula::Prop(n) => out.write_str(n),
        Formula::Start => out.write_str("#"),
        Formula::Attribute(n) => write!(out, "<{n}>T"),
        Formula::Var(n) => write!(out, "${n}"),
        Formula::Not(a) => {
            out.write_char('~')?;
            write_at(out, a, UNARY)
        }
        Formula::Modal(p, a) => {
            write!(out, "<{p}>")?;
            write_at(out, a, UNARY)
        }
        Formula::And(a, b) => write_binary(out, a, "&", b, AND, false),
        Formula::Or(a, b) => write_binary(out, a, "|", b, OR, false),
        Formula::Implies(a, b) => write_binary(out, a, "=>", b, IMPLIES, true),
        Formula::Equiv(a, b) => write_binary(out, a, "<=>", b, EQUIV, false),
        Formula::Let(bindings, body) => {
            out.write_str("let ")?;
            for (i, (name, def)) in bindings.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write!(out, "${name} = ")?;
                write_at(out, def, EQUIV)?;
            }
            out.write_str(" in ")?;
            write_formula(out, body)
        }
        Formula::Call(name, args) => {
            write!(out, "{name}(")?;
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                match arg {
                    Arg::Formula(f) => write_formula(out, f)?,
                    Arg::Text(s) => out.write_str(&quote(s))?,
                }
            }
            out.write_char(')')
        }
        Formula::AttrComplement(list) => {
            out.write_str("attribute_complement(")?;
            for (i, a) in list.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                out.write_str(&quote(a))?;
            }
            out.write_char(')')
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self)
    }
}
