//! Syntax tree dumps for the `parse` command.

use corelucid::syntax::{
    ContextEntry, Declaration, ExprKind, Expression, Location, TreeChild, TreeEntry,
};
use serde_json::{json, Value};

struct Node {
    label: String,
    loc: Option<Location>,
    children: Vec<Node>,
}

impl Node {
    fn new(label: impl Into<String>, loc: Option<Location>, children: Vec<Node>) -> Self {
        Node {
            label: label.into(),
            loc,
            children,
        }
    }
}

fn entries(es: &[ContextEntry]) -> Vec<Node> {
    es.iter()
        .map(|e| Node::new("Entry", None, vec![node(&e.dimension), node(&e.tag)]))
        .collect()
}

fn tree_entries(es: &[TreeEntry]) -> Vec<Node> {
    es.iter()
        .map(|e| {
            let child = match &e.child {
                TreeChild::Leaf(t) => node(t),
                TreeChild::Subtree { default, entries } => {
                    let mut kids: Vec<Node> = default
                        .iter()
                        .map(|d| Node::new("Default", None, vec![node(d)]))
                        .collect();
                    kids.extend(tree_entries(entries));
                    Node::new("Subtree", None, kids)
                }
            };
            Node::new("Branch", None, vec![node(&e.dimension), child])
        })
        .collect()
}

fn node(e: &Expression) -> Node {
    let at = Some(e.loc);
    let sub = |xs: &[&Expression]| xs.iter().map(|x| node(x)).collect::<Vec<_>>();
    match &e.kind {
        ExprKind::Literal { lexeme, .. } => Node::new(format!("Literal {lexeme}"), at, vec![]),
        ExprKind::TypedLiteral { value, .. } => {
            Node::new(format!("TypedLiteral {value}"), at, vec![])
        }
        ExprKind::SpecialLiteral(k) => Node::new(format!("Special {k}"), at, vec![]),
        ExprKind::Identifier(n) => Node::new(format!("Identifier {n}"), at, vec![]),
        ExprKind::Binary(op, l, r) => Node::new(format!("Binary {op}"), at, sub(&[l, r])),
        ExprKind::Unary(op, x) => Node::new(format!("Unary {op}"), at, sub(&[x])),
        ExprKind::IsSpecial(k, x) => {
            let label = match k {
                Some(k) => format!("IsSpecial {k}"),
                None => "IsSpecial".into(),
            };
            Node::new(label, at, sub(&[x]))
        }
        ExprKind::Conditional(c, t, f) => Node::new("If", at, sub(&[c, t, f])),
        ExprKind::Apply(name, args) => {
            Node::new(format!("Apply {name}"), at, args.iter().map(node).collect())
        }
        ExprKind::MemberCall(recv, name, args) => {
            let mut kids = vec![node(recv)];
            kids.extend(args.iter().map(node));
            Node::new(format!("MemberCall {name}"), at, kids)
        }
        ExprKind::TagQuery(d) => Node::new(format!("TagQuery {d}"), at, vec![]),
        ExprKind::ContextSwitch(x, c) => Node::new("At", at, sub(&[x, c])),
        ExprKind::ContextLiteral(es) => Node::new("Context", at, entries(es)),
        ExprKind::ContextSetLiteral(points) => Node::new(
            "ContextSet",
            at,
            points
                .iter()
                .map(|p| Node::new("Point", None, entries(p)))
                .collect(),
        ),
        ExprKind::TreeLiteral(es) => Node::new("Tree", at, tree_entries(es)),
        ExprKind::Where(body, decls) => {
            let mut kids = vec![node(body)];
            for d in decls {
                kids.push(match d {
                    Declaration::Var { name, body } => {
                        Node::new(format!("Var {name}"), None, vec![node(body)])
                    }
                    Declaration::Fun { name, params, body } => Node::new(
                        format!("Fun {name}({})", params.join(", ")),
                        None,
                        vec![node(body)],
                    ),
                    Declaration::Dim(d) => match &d.default_tag {
                        Some(t) => Node::new(format!("Dimension {} = {t}", d.name), None, vec![]),
                        None => Node::new(format!("Dimension {}", d.name), None, vec![]),
                    },
                });
            }
            Node::new("Where", at, kids)
        }
        ExprKind::SurfaceOp(op, args, d) => Node::new(
            format!("{}.{d}", op.keyword()),
            at,
            args.iter().map(node).collect(),
        ),
    }
}

fn write(n: &Node, depth: usize, out: &mut String) {
    out.push_str(&"  ".repeat(depth));
    out.push_str(&n.label);
    if let Some(loc) = n.loc {
        out.push_str(&format!(" [{loc}]"));
    }
    out.push('\n');
    for c in &n.children {
        write(c, depth + 1, out);
    }
}

/// One node per line, children indented under their parent.
pub fn render(e: &Expression) -> String {
    let mut out = String::new();
    write(&node(e), 0, &mut out);
    out
}

fn json_of(n: &Node) -> Value {
    let mut v = json!({ "node": n.label });
    if let Some(loc) = n.loc {
        v["line"] = json!(loc.line);
        v["column"] = json!(loc.column);
    }
    if !n.children.is_empty() {
        v["children"] = Value::Array(n.children.iter().map(json_of).collect());
    }
    v
}

pub fn to_json(e: &Expression) -> Value {
    json_of(&node(e))
}
