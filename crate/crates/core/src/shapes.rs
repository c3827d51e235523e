//! Interface shapes (polynomial functors without constants), their
//! complement, and the refinement order `F ◁ G`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::CompositeType;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Id,
    Prod(Box<Shape>, Box<Shape>),
    Coprod(Box<Shape>, Box<Shape>),
    /// `F^T`: an input port of type `T` in front of `F`.
    Input(Box<Shape>, CompositeType),
    /// `F_T`: an output port of type `T` in front of `F`.
    Output(Box<Shape>, CompositeType),
}

impl Shape {
    pub fn prod(l: Shape, r: Shape) -> Shape {
        Shape::Prod(Box::new(l), Box::new(r))
    }

    pub fn coprod(l: Shape, r: Shape) -> Shape {
        Shape::Coprod(Box::new(l), Box::new(r))
    }

    pub fn input(inner: Shape, t: CompositeType) -> Shape {
        Shape::Input(Box::new(inner), t)
    }

    pub fn output(inner: Shape, t: CompositeType) -> Shape {
        Shape::Output(Box::new(inner), t)
    }

    pub fn size(&self) -> usize {
        match self {
            Shape::Id => 1,
            Shape::Prod(l, r) | Shape::Coprod(l, r) => 1 + l.size() + r.size(),
            Shape::Input(i, _) | Shape::Output(i, _) => 1 + i.size(),
        }
    }

    /// Immediate sub-shapes `F'` with a generating rule `F' ◁ self`.
    pub fn children(&self) -> Vec<&Shape> {
        match self {
            Shape::Id => vec![],
            Shape::Prod(l, r) | Shape::Coprod(l, r) => vec![l, r],
            Shape::Input(i, _) | Shape::Output(i, _) => vec![i],
        }
    }
}

/// Swap every input for an output and every product for a coproduct.
pub fn complement(f: &Shape) -> Shape {
    match f {
        Shape::Id => Shape::Id,
        Shape::Prod(l, r) => Shape::coprod(complement(l), complement(r)),
        Shape::Coprod(l, r) => Shape::prod(complement(l), complement(r)),
        Shape::Input(i, t) => Shape::output(complement(i), t.clone()),
        Shape::Output(i, t) => Shape::input(complement(i), t.clone()),
    }
}

/// Decide `f ◁ g`.
///
/// Every generating rule relates a shape to one of its immediate
/// sub-shapes, so the reflexive-transitive closure is "`f` occurs as a
/// subtree of `g`".
pub fn refines(f: &Shape, g: &Shape) -> bool {
    if f == g {
        return true;
    }
    // Id occurs at every leaf.
    if *f == Shape::Id {
        return true;
    }
    if f.size() >= g.size() {
        return false;
    }
    g.children().into_iter().any(|c| refines(f, c))
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_shape(self, 0, f)
    }
}

fn port_type(t: &CompositeType) -> String {
    match t {
        CompositeType::Opaque(_) | CompositeType::One => t.to_string(),
        _ => format!("({t})"),
    }
}

// prec: 0 = coproduct context, 1 = product context, 2 = postfix operand
fn write_shape(s: &Shape, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match s {
        Shape::Id => f.write_str("Id"),
        Shape::Input(i, t) => {
            write_shape(i, 2, f)?;
            write!(f, " ^ {}", port_type(t))
        }
        Shape::Output(i, t) => {
            write_shape(i, 2, f)?;
            write!(f, " _ {}", port_type(t))
        }
        Shape::Prod(l, r) => {
            if prec > 1 {
                f.write_str("(")?;
            }
            write_shape(l, 1, f)?;
            f.write_str(" x ")?;
            write_shape(r, 2, f)?;
            if prec > 1 {
                f.write_str(")")?;
            }
            Ok(())
        }
        Shape::Coprod(l, r) => {
            if prec > 0 {
                f.write_str("(")?;
            }
            write_shape(l, 0, f)?;
            f.write_str(" (+) ")?;
            write_shape(r, 1, f)?;
            if prec > 0 {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}
