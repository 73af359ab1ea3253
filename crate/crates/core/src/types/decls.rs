use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::{match_type, normalize_sum, PredicateType, SimpleType, Subst, BASE_TYPES};
use crate::ast::{is_greek, quote_atom, Program, TypeDecl, TypeExpr, CONS, NIL};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeDeclError {
    #[error("type `{name}` takes {expected} arguments, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("recursive use of `{0}` must repeat its own parameters")]
    NonRegular(String),
    #[error("type variable `{var}` is not a parameter of `{decl}`")]
    UnboundParam { decl: String, var: String },
    #[error("parameter `{var}` of `{decl}` is repeated")]
    DuplicateParam { decl: String, var: String },
    #[error("`{symbol}` is declared by both `{first}` and `{second}`")]
    DuplicateSymbol {
        symbol: String,
        first: String,
        second: String,
    },
    #[error("declaration `{0}` mentions bool")]
    BoolInDeclaration(String),
}

/// A resolved `:- type` declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclInfo {
    pub name: String,
    pub params: Vec<String>,
    /// The expansion at its own parameters, a recursive type when the
    /// declaration refers to itself.
    pub generic: SimpleType,
    pub constants: Vec<String>,
    pub constructors: Vec<(String, usize)>,
}

/// `type(f) = args -> result` for a declared constructor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorType {
    pub args: Vec<SimpleType>,
    pub result: SimpleType,
    pub decl: String,
}

/// What a type contributes to the domain partition: a base type, a declared
/// type, an unknown (type variable), `bool`, or an undeclared functor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DomainClass {
    Base(String),
    Decl(String),
    Var(String),
    Bool,
    Undeclared(String),
}

/// The `type` function induced by the declarations of a program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeDeclTable {
    raw: BTreeMap<String, TypeDecl>,
    decls: Vec<DeclInfo>,
    consts: BTreeMap<String, (SimpleType, String)>,
    ctors: BTreeMap<(String, usize), CtorType>,
}

struct Scope<'a> {
    env: BTreeMap<String, SimpleType>,
    bound: Vec<String>,
    stack: Vec<(String, Vec<SimpleType>)>,
    decl: Option<&'a str>,
}

/// Base type of an undeclared constant, read off its literal form.
pub fn literal_base(c: &str) -> &'static str {
    let mut parts = c.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    match parts.next() {
        None if digits(int) => "int",
        Some(frac) if digits(int) && digits(frac) => "float",
        _ => "atom",
    }
}

impl TypeDeclTable {
    pub fn empty() -> TypeDeclTable {
        TypeDeclTable::default()
    }

    pub fn from_program(p: &Program) -> Result<TypeDeclTable, TypeDeclError> {
        TypeDeclTable::from_decls(&p.type_decls)
    }

    pub fn from_decls(decls: &[TypeDecl]) -> Result<TypeDeclTable, TypeDeclError> {
        let mut table = TypeDeclTable::empty();
        for d in decls {
            let mut seen = BTreeSet::new();
            for p in &d.params {
                if !seen.insert(p) {
                    return Err(TypeDeclError::DuplicateParam {
                        decl: d.name.clone(),
                        var: p.clone(),
                    });
                }
            }
            table.raw.insert(d.name.clone(), d.clone());
        }
        for d in decls {
            let params: Vec<SimpleType> = d.params.iter().map(|p| SimpleType::var(p)).collect();
            let generic = table.expand(&d.name, &params, &mut Vec::new())?;
            let mut info = DeclInfo {
                name: d.name.clone(),
                params: d.params.clone(),
                generic: generic.clone(),
                constants: Vec::new(),
                constructors: Vec::new(),
            };
            for s in &d.summands {
                let mut scope = table.decl_scope(d);
                match table.resolve_in(s, &mut scope)? {
                    SimpleType::Const(c) => {
                        table.declare_const(&c, &generic, &d.name)?;
                        if !info.constants.contains(&c) {
                            info.constants.push(c);
                        }
                    }
                    SimpleType::App(f, _) => {
                        let TypeExpr::Sym(_, args) = s else { continue };
                        let mut arg_types = Vec::new();
                        for a in args {
                            let mut scope = table.decl_scope(d);
                            arg_types.push(table.resolve_in(a, &mut scope)?);
                        }
                        let key = (f.clone(), arg_types.len());
                        if let Some(prev) = table.ctors.get(&key) {
                            if prev.decl != d.name {
                                return Err(TypeDeclError::DuplicateSymbol {
                                    symbol: f,
                                    first: prev.decl.clone(),
                                    second: d.name.clone(),
                                });
                            }
                            continue;
                        }
                        table.ctors.insert(
                            key.clone(),
                            CtorType {
                                args: arg_types,
                                result: generic.clone(),
                                decl: d.name.clone(),
                            },
                        );
                        info.constructors.push(key);
                    }
                    _ => {}
                }
            }
            table.decls.push(info);
        }
        Ok(table)
    }

    fn decl_scope<'a>(&self, d: &'a TypeDecl) -> Scope<'a> {
        Scope {
            env: d
                .params
                .iter()
                .map(|p| (p.clone(), SimpleType::var(p)))
                .collect(),
            bound: Vec::new(),
            stack: Vec::new(),
            decl: Some(&d.name),
        }
    }

    fn declare_const(&mut self, c: &str, t: &SimpleType, decl: &str) -> Result<(), TypeDeclError> {
        if let Some((_, prev)) = self.consts.get(c) {
            if prev != decl {
                return Err(TypeDeclError::DuplicateSymbol {
                    symbol: c.into(),
                    first: prev.clone(),
                    second: decl.into(),
                });
            }
            return Ok(());
        }
        self.consts.insert(c.into(), (t.clone(), decl.into()));
        Ok(())
    }

    fn expand(
        &self,
        name: &str,
        args: &[SimpleType],
        stack: &mut Vec<(String, Vec<SimpleType>)>,
    ) -> Result<SimpleType, TypeDeclError> {
        let d = &self.raw[name];
        if let Some((_, prev)) = stack.iter().find(|(n, _)| n == name) {
            return if prev.as_slice() == args {
                Ok(SimpleType::var(name))
            } else {
                Err(TypeDeclError::NonRegular(name.into()))
            };
        }
        stack.push((name.into(), args.to_vec()));
        let mut scope = Scope {
            env: d.params.iter().cloned().zip(args.iter().cloned()).collect(),
            bound: Vec::new(),
            stack: core::mem::take(stack),
            decl: Some(name),
        };
        let mut items = Vec::new();
        let mut result = Ok(());
        for s in &d.summands {
            match self.resolve_in(s, &mut scope) {
                Ok(t) => items.push(t),
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        *stack = scope.stack;
        stack.pop();
        result?;
        let body = normalize_sum(&SimpleType::Sum(items));
        if body.free_vars().contains(name) {
            Ok(SimpleType::mu(name, body))
        } else {
            Ok(body)
        }
    }

    fn resolve_in(&self, e: &TypeExpr, scope: &mut Scope<'_>) -> Result<SimpleType, TypeDeclError> {
        match e {
            TypeExpr::Var(v) => match scope.env.get(v) {
                Some(t) => Ok(t.clone()),
                None => match scope.decl {
                    Some(d) => Err(TypeDeclError::UnboundParam {
                        decl: d.into(),
                        var: v.clone(),
                    }),
                    None => Ok(SimpleType::var(v)),
                },
            },
            TypeExpr::Sum(items) => {
                let ts = items
                    .iter()
                    .map(|i| self.resolve_in(i, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(normalize_sum(&SimpleType::Sum(ts)))
            }
            TypeExpr::Mu(b, body) => {
                scope.bound.push(b.clone());
                let r = self.resolve_in(body, scope);
                scope.bound.pop();
                Ok(SimpleType::mu(b, r?))
            }
            TypeExpr::Sym(name, args) => {
                if args.is_empty() {
                    if scope.bound.contains(name) {
                        return Ok(SimpleType::var(name));
                    }
                    if let Some(t) = scope.env.get(name) {
                        return Ok(t.clone());
                    }
                    if is_greek(name) {
                        return match scope.decl {
                            Some(d) => Err(TypeDeclError::UnboundParam {
                                decl: d.into(),
                                var: name.clone(),
                            }),
                            None => Ok(SimpleType::var(name)),
                        };
                    }
                    if BASE_TYPES.contains(&name.as_str()) {
                        return Ok(SimpleType::base(name));
                    }
                    if name == "bool" {
                        return match scope.decl {
                            Some(d) => Err(TypeDeclError::BoolInDeclaration(d.into())),
                            None => Ok(SimpleType::Bool),
                        };
                    }
                }
                let resolved = args
                    .iter()
                    .map(|a| self.resolve_in(a, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(d) = self.raw.get(name) {
                    if d.params.len() == args.len() {
                        return self.expand(name, &resolved, &mut scope.stack);
                    }
                    if !args.is_empty() {
                        return Err(TypeDeclError::Arity {
                            name: name.clone(),
                            expected: d.params.len(),
                            found: args.len(),
                        });
                    }
                }
                if resolved.is_empty() {
                    Ok(SimpleType::constant(name))
                } else {
                    Ok(SimpleType::App(name.clone(), resolved))
                }
            }
        }
    }

    /// Resolves a surface type: declared names expand, `int`/`float`/`atom`
    /// are base types, mu-bound and Greek names are variables, other
    /// applied names are type functions and bare names type constants.
    pub fn resolve(&self, e: &TypeExpr) -> Result<SimpleType, TypeDeclError> {
        let mut scope = Scope {
            env: BTreeMap::new(),
            bound: Vec::new(),
            stack: Vec::new(),
            decl: None,
        };
        self.resolve_in(e, &mut scope)
    }

    pub fn resolve_pred(&self, es: &[TypeExpr]) -> Result<PredicateType, TypeDeclError> {
        Ok(PredicateType::new(
            es.iter()
                .map(|e| self.resolve(e))
                .collect::<Result<_, _>>()?,
        ))
    }

    pub fn decls(&self) -> &[DeclInfo] {
        &self.decls
    }

    pub fn decl(&self, name: &str) -> Option<&DeclInfo> {
        self.decls.iter().find(|d| d.name == name)
    }

    /// A declared type at the given arguments.
    pub fn instantiate_decl(&self, name: &str, args: &[SimpleType]) -> Option<SimpleType> {
        let d = self.decl(name)?;
        if d.params.len() != args.len() {
            return None;
        }
        let phi: Subst = d.params.iter().cloned().zip(args.iter().cloned()).collect();
        Some(normalize_sum(&super::subst(&d.generic, &phi)))
    }

    pub fn declared_constant(&self, c: &str) -> Option<(&SimpleType, &str)> {
        self.consts.get(c).map(|(t, d)| (t, d.as_str()))
    }

    /// `type(c)`: the declared type, or the base type of its literal form.
    pub fn type_of_constant(&self, c: &str) -> SimpleType {
        match self.consts.get(c) {
            Some((t, _)) => t.clone(),
            None => SimpleType::base(literal_base(c)),
        }
    }

    pub fn type_of_functor(&self, f: &str, arity: usize) -> Option<&CtorType> {
        self.ctors.get(&(String::from(f), arity))
    }

    pub fn constructors(&self) -> impl Iterator<Item = (&(String, usize), &CtorType)> {
        self.ctors.iter()
    }

    pub fn declared_constants(&self) -> impl Iterator<Item = (&str, &SimpleType, &str)> {
        self.consts
            .iter()
            .map(|(c, (t, d))| (c.as_str(), t, d.as_str()))
    }

    /// Domain classes a type's values may fall into.
    pub fn domain_classes(&self, t: &SimpleType) -> BTreeSet<DomainClass> {
        let mut out = BTreeSet::new();
        self.classes_into(t, &mut Vec::new(), &mut out);
        out
    }

    fn classes_into(
        &self,
        t: &SimpleType,
        bound: &mut Vec<String>,
        out: &mut BTreeSet<DomainClass>,
    ) {
        match t {
            SimpleType::Var(v) => {
                if !bound.contains(v) {
                    out.insert(DomainClass::Var(v.clone()));
                }
            }
            SimpleType::Base(b) => {
                out.insert(DomainClass::Base(b.clone()));
            }
            SimpleType::Bool => {
                out.insert(DomainClass::Bool);
            }
            SimpleType::Const(c) => {
                out.insert(match self.consts.get(c) {
                    Some((_, d)) => DomainClass::Decl(d.clone()),
                    None => DomainClass::Base(literal_base(c).into()),
                });
            }
            SimpleType::App(f, args) => {
                out.insert(match self.ctors.get(&(f.clone(), args.len())) {
                    Some(ct) => DomainClass::Decl(ct.decl.clone()),
                    None => DomainClass::Undeclared(f.clone()),
                });
            }
            SimpleType::Sum(items) => items.iter().for_each(|i| self.classes_into(i, bound, out)),
            SimpleType::Mu(b, body) => {
                bound.push(b.clone());
                self.classes_into(body, bound, out);
                bound.pop();
            }
        }
    }

    /// Paper notation with declared types folded back to their names and
    /// free variables renamed `A`, `B`, ...
    pub fn show(&self, t: &SimpleType) -> String {
        let ren = rename_vars(core::slice::from_ref(t));
        self.show_with(t, &ren)
    }

    pub fn show_pred(&self, pt: &PredicateType) -> String {
        let ren = rename_vars(&pt.args);
        if pt.args.is_empty() {
            return "bool".into();
        }
        if let [only] = pt.args.as_slice() {
            return format!("{} -> bool", self.show_with(only, &ren));
        }
        let args: Vec<String> = pt.args.iter().map(|a| self.show_atomic(a, &ren)).collect();
        format!("{} -> bool", args.join(" * "))
    }

    /// Shows several types with one shared variable renaming.
    pub fn show_all(&self, ts: &[SimpleType]) -> Vec<String> {
        let ren = rename_vars(ts);
        ts.iter().map(|t| self.show_with(t, &ren)).collect()
    }

    fn show_atomic(&self, t: &SimpleType, ren: &BTreeMap<String, String>) -> String {
        let s = self.show_with(t, ren);
        match t {
            SimpleType::Sum(_) | SimpleType::Mu(..) if self.fold(t).is_none() => format!("({s})"),
            _ => s,
        }
    }

    fn fold(&self, t: &SimpleType) -> Option<(String, Vec<SimpleType>)> {
        for d in &self.decls {
            if matches!(
                d.generic,
                SimpleType::Var(_) | SimpleType::Base(_) | SimpleType::Const(_) | SimpleType::Bool
            ) {
                continue;
            }
            let flexible: BTreeSet<String> = d.params.iter().cloned().collect();
            let mut phi = Subst::new();
            if match_type(&d.generic, t, &flexible, &mut phi) {
                let args = d
                    .params
                    .iter()
                    .map(|p| phi.get(p).cloned().unwrap_or_else(|| SimpleType::var(p)))
                    .collect();
                return Some((d.name.clone(), args));
            }
        }
        None
    }

    fn show_with(&self, t: &SimpleType, ren: &BTreeMap<String, String>) -> String {
        if let Some((name, args)) = self.fold(t) {
            if args.is_empty() {
                return quote_atom(&name);
            }
            let shown: Vec<String> = args.iter().map(|a| self.show_with(a, ren)).collect();
            return format!("{}({})", quote_atom(&name), shown.join(", "));
        }
        match t {
            SimpleType::Var(v) => ren.get(v).cloned().unwrap_or_else(|| v.clone()),
            SimpleType::Sum(items) => items
                .iter()
                .map(|i| self.show_atomic(i, ren))
                .collect::<Vec<_>>()
                .join(" + "),
            SimpleType::Mu(b, body) => format!("mu {b}. {}", self.show_atomic(body, ren)),
            SimpleType::App(f, args) if f == CONS && args.len() == 2 => format!(
                "[{}|{}]",
                self.show_atomic(&args[0], ren),
                self.show_with(&args[1], ren)
            ),
            SimpleType::App(f, args) => {
                let shown: Vec<String> = args.iter().map(|a| self.show_with(a, ren)).collect();
                let name = if f == NIL {
                    "'[]'".into()
                } else {
                    quote_atom(f)
                };
                format!("{name}({})", shown.join(", "))
            }
            other => other.to_string(),
        }
    }
}

/// Maps free variables, in order of appearance, to `A`, `B`, ..., `Z`, `A1`, ...
fn rename_vars(ts: &[SimpleType]) -> BTreeMap<String, String> {
    let mut order = Vec::new();
    ts.iter().for_each(|t| t.free_vars_ordered(&mut order));
    order
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let letter = char::from(b'A' + (i % 26) as u8);
            let name = if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            };
            (v, name)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_program, parse_type_expr};
    use alloc::vec;

    fn table(src: &str) -> TypeDeclTable {
        TypeDeclTable::from_program(&parse_program(src).unwrap()).unwrap()
    }

    const LIST: &str = ":- type list(A) = [] + [A|list(A)].";

    #[test]
    fn list_declaration_gives_constant_and_constructor_types() {
        let t = table(LIST);
        let list_a = t.decl("list").unwrap().generic.clone();
        assert_eq!(list_a.to_string(), "mu list. ([] + [A|list])");
        assert_eq!(t.type_of_constant("[]"), list_a);
        let cons = t.type_of_functor(CONS, 2).unwrap();
        assert_eq!(cons.args, vec![SimpleType::var("A"), list_a.clone()]);
        assert_eq!(cons.result, list_a);
        assert_eq!(t.show(&list_a), "list(A)");
    }

    #[test]
    fn undeclared_constants_follow_their_literal() {
        let t = TypeDeclTable::empty();
        assert_eq!(t.type_of_constant("1"), SimpleType::base("int"));
        assert_eq!(t.type_of_constant("2.5"), SimpleType::base("float"));
        assert_eq!(t.type_of_constant("a"), SimpleType::base("atom"));
        assert!(t.type_of_functor("s", 1).is_none());
    }

    #[test]
    fn resolution_of_surface_types() {
        let t = table(LIST);
        let parse = |s: &str| t.resolve(&parse_type_expr(s).unwrap()).unwrap();
        assert_eq!(
            parse("list(int)"),
            t.instantiate_decl("list", &[SimpleType::base("int")])
                .unwrap()
        );
        assert_eq!(t.show(&parse("list(int)")), "list(int)");
        assert_eq!(
            parse("mu a. ([] + [int|a])").to_string(),
            "mu a. ([] + [int|a])"
        );
        assert_eq!(t.show(&parse("mu a. ([] + [int|a])")), "list(int)");
        assert_eq!(parse("α"), SimpleType::var("α"));
        assert_eq!(parse("int + atom").to_string(), "int + atom");
        assert_eq!(parse("bool"), SimpleType::Bool);
    }

    #[test]
    fn nat_and_dummy_declarations() {
        let t = table(":- type nat = 0 + s(nat).");
        let nat = t.decl("nat").unwrap().generic.clone();
        assert_eq!(t.type_of_constant("0"), nat);
        assert_eq!(t.type_of_functor("s", 1).unwrap().args, vec![nat.clone()]);
        assert_eq!(t.show(&nat), "nat");
        let d = table(":- type dummy(A) = 1 + [] + [A|dummy(A)].");
        assert_eq!(d.show(&d.type_of_constant("1")), "dummy(A)");
        assert_eq!(d.type_of_constant("1"), d.type_of_constant("[]"));
    }

    #[test]
    fn declaration_errors() {
        let err =
            |src: &str| TypeDeclTable::from_program(&parse_program(src).unwrap()).unwrap_err();
        assert!(matches!(
            err(":- type t(A) = f(B)."),
            TypeDeclError::UnboundParam { .. }
        ));
        assert!(matches!(
            err(":- type t(A) = f(t(int))."),
            TypeDeclError::NonRegular(_)
        ));
        assert!(matches!(
            err(":- type t = a + b.\n:- type u = a."),
            TypeDeclError::DuplicateSymbol { .. }
        ));
        assert!(matches!(
            err(":- type t = f(bool)."),
            TypeDeclError::BoolInDeclaration(_)
        ));
    }

    #[test]
    fn domain_classes_of_types() {
        let t = table(LIST);
        let list_a = t.decl("list").unwrap().generic.clone();
        assert_eq!(
            t.domain_classes(&list_a),
            [DomainClass::Decl("list".into())].into_iter().collect()
        );
        let s = SimpleType::sum(vec![SimpleType::base("int"), SimpleType::var("B")]);
        assert_eq!(t.domain_classes(&s).len(), 2);
    }

    #[test]
    fn mutually_referring_declarations() {
        let t = table(
            ":- type tree = leaf + node(forest).\n:- type forest = nil + cons(tree, forest).",
        );
        let tree = t.decl("tree").unwrap().generic.clone();
        assert_eq!(t.show(&tree), "tree");
        let node = t.type_of_functor("node", 1).unwrap();
        assert_eq!(t.show(&node.args[0]), "forest");
    }
}
