//! Opaque types and functions, the composite type algebra, and the
//! sum-of-products variant table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of an opaque (uninterpreted) type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpaqueTypeId(pub String);

impl OpaqueTypeId {
    pub fn new(name: impl Into<String>) -> Self {
        OpaqueTypeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for OpaqueTypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A composite type: opaque types closed under the singleton `1`, binary
/// products and binary coproducts.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CompositeType {
    Opaque(OpaqueTypeId),
    One,
    Product(Box<CompositeType>, Box<CompositeType>),
    Coproduct(Box<CompositeType>, Box<CompositeType>),
}

impl CompositeType {
    pub fn opaque(name: impl Into<String>) -> Self {
        CompositeType::Opaque(OpaqueTypeId::new(name))
    }

    pub fn product(left: CompositeType, right: CompositeType) -> Self {
        CompositeType::Product(Box::new(left), Box::new(right))
    }

    pub fn coproduct(left: CompositeType, right: CompositeType) -> Self {
        CompositeType::Coproduct(Box::new(left), Box::new(right))
    }

    /// Number of variants, computed without materialising the table.
    pub fn variant_count(&self) -> usize {
        match self {
            CompositeType::Opaque(_) | CompositeType::One => 1,
            CompositeType::Product(l, r) => l.variant_count() * r.variant_count(),
            CompositeType::Coproduct(l, r) => l.variant_count() + r.variant_count(),
        }
    }

    /// Opaque types mentioned anywhere in the tree.
    pub fn opaque_ids(&self) -> BTreeSet<&OpaqueTypeId> {
        let mut out = BTreeSet::new();
        self.collect_ids(&mut out);
        out
    }

    fn collect_ids<'a>(&'a self, out: &mut BTreeSet<&'a OpaqueTypeId>) {
        match self {
            CompositeType::Opaque(id) => {
                out.insert(id);
            }
            CompositeType::One => {}
            CompositeType::Product(l, r) | CompositeType::Coproduct(l, r) => {
                l.collect_ids(out);
                r.collect_ids(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CompositeType::Opaque(_) | CompositeType::One => 0,
            CompositeType::Product(l, r) | CompositeType::Coproduct(l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

impl fmt::Display for CompositeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &CompositeType, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            // prec: 0 = sum context, 1 = product context, 2 = atom
            match t {
                CompositeType::Opaque(id) => write!(f, "{id}"),
                CompositeType::One => f.write_str("1"),
                CompositeType::Product(l, r) => {
                    if prec > 1 {
                        f.write_str("(")?;
                    }
                    go(l, 1, f)?;
                    f.write_str(" * ")?;
                    go(r, 2, f)?;
                    if prec > 1 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
                CompositeType::Coproduct(l, r) => {
                    if prec > 0 {
                        f.write_str("(")?;
                    }
                    go(l, 0, f)?;
                    f.write_str(" + ")?;
                    go(r, 1, f)?;
                    if prec > 0 {
                        f.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, 0, f)
    }
}

/// One product term of the sum-of-products form of a type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub index: usize,
    pub components: Vec<OpaqueTypeId>,
}

/// The variants of `t` in canonical order.
///
/// Coproduct variants list the left summand's variants before the right's.
/// Product variants are ordered lexicographically with the left factor
/// major, and each component list is the left factor's components followed
/// by the right factor's. This makes the variant index of a product value
/// `left_index * |var right| + right_index`.
pub fn variants(t: &CompositeType) -> Vec<Variant> {
    component_lists(t)
        .into_iter()
        .enumerate()
        .map(|(index, components)| Variant { index, components })
        .collect()
}

fn component_lists(t: &CompositeType) -> Vec<Vec<OpaqueTypeId>> {
    match t {
        CompositeType::Opaque(id) => vec![vec![id.clone()]],
        CompositeType::One => vec![vec![]],
        CompositeType::Product(l, r) => {
            let left = component_lists(l);
            let right = component_lists(r);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for lc in &left {
                for rc in &right {
                    let mut c = lc.clone();
                    c.extend(rc.iter().cloned());
                    out.push(c);
                }
            }
            out
        }
        CompositeType::Coproduct(l, r) => {
            let mut out = component_lists(l);
            out.extend(component_lists(r));
            out
        }
    }
}

/// Variant counts of `t`, `u`, their product and their coproduct.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariantCounts {
    pub left: usize,
    pub right: usize,
    pub product: usize,
    pub coproduct: usize,
}

pub fn variant_count_product(t: &CompositeType, u: &CompositeType) -> VariantCounts {
    VariantCounts {
        left: variants(t).len(),
        right: variants(u).len(),
        product: variants(&CompositeType::product(t.clone(), u.clone())).len(),
        coproduct: variants(&CompositeType::coproduct(t.clone(), u.clone())).len(),
    }
}

/// Signature `name : domain -> codomain` of an opaque function.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionSignature {
    pub name: String,
    pub domain: CompositeType,
    pub codomain: CompositeType,
}

impl fmt::Display for FunctionSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.name, self.domain, self.codomain)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("duplicate type `{0}`")]
    DuplicateType(String),
    #[error("duplicate function `{0}`")]
    DuplicateFunction(String),
    #[error("function `{function}` mentions undeclared type `{ty}`")]
    UndeclaredType { function: String, ty: String },
}

/// Declared opaque types and function signatures.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTable {
    types: BTreeSet<OpaqueTypeId>,
    functions: BTreeMap<String, FunctionSignature>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_type(&mut self, name: impl Into<String>) -> Result<OpaqueTypeId, SymbolError> {
        let id = OpaqueTypeId::new(name);
        if !self.types.insert(id.clone()) {
            return Err(SymbolError::DuplicateType(id.0));
        }
        Ok(id)
    }

    pub fn declare_function(
        &mut self,
        name: impl Into<String>,
        domain: CompositeType,
        codomain: CompositeType,
    ) -> Result<&FunctionSignature, SymbolError> {
        let name = name.into();
        if self.functions.contains_key(&name) {
            return Err(SymbolError::DuplicateFunction(name));
        }
        for id in domain.opaque_ids().into_iter().chain(codomain.opaque_ids()) {
            if !self.types.contains(id) {
                return Err(SymbolError::UndeclaredType {
                    function: name,
                    ty: id.0.clone(),
                });
            }
        }
        let sig = FunctionSignature {
            name: name.clone(),
            domain,
            codomain,
        };
        Ok(self.functions.entry(name).or_insert(sig))
    }

    pub fn has_type(&self, id: &OpaqueTypeId) -> bool {
        self.types.contains(id)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionSignature> {
        self.functions.get(name)
    }

    pub fn types(&self) -> impl Iterator<Item = &OpaqueTypeId> {
        self.types.iter()
    }

    pub fn functions(&self) -> impl Iterator<Item = &FunctionSignature> {
        self.functions.values()
    }

    /// True when every opaque type in `t` is declared.
    pub fn is_well_formed(&self, t: &CompositeType) -> bool {
        t.opaque_ids().into_iter().all(|id| self.types.contains(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(n: &str) -> CompositeType {
        CompositeType::opaque(n)
    }

    fn ids(v: &[&str]) -> Vec<OpaqueTypeId> {
        v.iter().map(|s| OpaqueTypeId::new(*s)).collect()
    }

    #[test]
    fn foo_times_bool_has_two_foo_variants() {
        let t = CompositeType::product(
            o("foo"),
            CompositeType::coproduct(CompositeType::One, CompositeType::One),
        );
        let vs = variants(&t);
        assert_eq!(vs.len(), 2);
        assert_eq!(
            vs[0],
            Variant {
                index: 0,
                components: ids(&["foo"])
            }
        );
        assert_eq!(
            vs[1],
            Variant {
                index: 1,
                components: ids(&["foo"])
            }
        );
    }

    #[test]
    fn singleton_has_one_empty_variant() {
        assert_eq!(
            variants(&CompositeType::One),
            vec![Variant {
                index: 0,
                components: vec![]
            }]
        );
    }

    /// Expand a type as a formal polynomial: a sum of monomials, each a word
    /// over the opaque names. Independent of the variant table code.
    fn poly(t: &CompositeType) -> Vec<String> {
        match t {
            CompositeType::Opaque(id) => vec![id.0.clone()],
            CompositeType::One => vec![String::new()],
            CompositeType::Product(l, r) => {
                let mut out = vec![];
                for a in poly(l) {
                    for b in poly(r) {
                        out.push(format!("{a}{b}"));
                    }
                }
                out
            }
            CompositeType::Coproduct(l, r) => {
                let mut out = poly(l);
                out.extend(poly(r));
                out
            }
        }
    }

    #[test]
    fn distributes_two_sums() {
        let t = CompositeType::product(
            CompositeType::coproduct(o("A"), o("B")),
            CompositeType::coproduct(o("C"), o("D")),
        );
        assert_eq!(poly(&t), vec!["AC", "AD", "BC", "BD"]);
        let got: Vec<Vec<OpaqueTypeId>> = variants(&t).into_iter().map(|v| v.components).collect();
        assert_eq!(
            got,
            vec![ids(&["A", "C"]), ids(&["A", "D"]), ids(&["B", "C"]), ids(&["B", "D"])]
        );
    }

    #[test]
    fn count_helper() {
        let b = CompositeType::coproduct(CompositeType::One, CompositeType::One);
        assert_eq!(variant_count_product(&b, &b).product, 4);
        assert_eq!(variant_count_product(&o("foo"), &CompositeType::One).product, 1);
        let t = CompositeType::product(CompositeType::coproduct(o("A"), o("B")), o("C"));
        let u = CompositeType::coproduct(o("D"), CompositeType::One);
        // oracle: 2 monomials times 2 monomials
        assert_eq!(poly(&t).len() * poly(&u).len(), 4);
        assert_eq!(variant_count_product(&t, &u).product, 4);
    }

    #[test]
    fn symbol_table_rejects_duplicates_and_undeclared() {
        let mut st = SymbolTable::new();
        st.declare_type("int").unwrap();
        assert!(matches!(st.declare_type("int"), Err(SymbolError::DuplicateType(_))));
        st.declare_function("add", CompositeType::product(o("int"), o("int")), o("int"))
            .unwrap();
        assert!(st.declare_function("add", o("int"), o("int")).is_err());
        assert!(matches!(
            st.declare_function("f", o("nope"), o("int")),
            Err(SymbolError::UndeclaredType { .. })
        ));
    }

    #[test]
    fn display_respects_precedence() {
        let t = CompositeType::product(CompositeType::coproduct(o("A"), o("B")), o("C"));
        assert_eq!(t.to_string(), "(A + B) * C");
        let u = CompositeType::coproduct(o("A"), CompositeType::product(o("B"), o("C")));
        assert_eq!(u.to_string(), "A + B * C");
    }
}
