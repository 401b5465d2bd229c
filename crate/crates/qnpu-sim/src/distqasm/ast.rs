/// A quantum node, identified by name and by a dense index assigned during
/// parsing in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub name: String,
    pub index: usize,
}

/// A reference to one qubit of a declared register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitRef {
    pub register: String,
    pub offset: usize,
    /// Index of the node that hosts the register.
    pub home_node: usize,
}

/// A quantum register declaration with its host node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegDecl {
    pub name: String,
    pub size: usize,
    pub node: usize,
}

/// Gate names accepted by the frontend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    Rx,
    Ry,
    Rz,
    Cnot,
    Cp,
    Swap,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cnot => "cnot",
            GateKind::Cp => "cp",
            GateKind::Swap => "swap",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Y | GateKind::Z => 1,
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot | GateKind::Cp | GateKind::Swap => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cp => 1,
            _ => 0,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "cnot" | "cx" => GateKind::Cnot,
            "cp" => GateKind::Cp,
            "swap" => GateKind::Swap,
            _ => return None,
        })
    }
}

/// One program statement, in source order.
#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    LocalGate {
        gate: GateKind,
        params: Vec<f64>,
        qubits: Vec<QubitRef>,
    },
    /// Move a qubit state from `src` to `dst` via the TP-Comm protocol.
    Teleport { src: QubitRef, dst: QubitRef },
    /// Entangle `dst` with `src` via the cat entangler.
    CatEnt { src: QubitRef, dst: QubitRef },
    /// Disentangle the remote proxy qubit, folding corrections into `home`.
    CatDisent { remote: QubitRef, home: QubitRef },
    /// Statements delimited by `pragma remote_begin <node>` / `remote_end`.
    RemoteBlock { node: usize, body: Vec<Stmt> },
    Measure { qubit: QubitRef, bit: (String, usize) },
}

/// Node-annotated gate-level program: the unit the compiler transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitIr {
    pub nodes: Vec<NodeId>,
    pub qregs: Vec<RegDecl>,
    pub cregs: Vec<(String, usize)>,
    pub stmts: Vec<Stmt>,
}

impl CircuitIr {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn qreg(&self, name: &str) -> Option<&RegDecl> {
        self.qregs.iter().find(|r| r.name == name)
    }

    /// Total data qubits hosted by `node`.
    pub fn qubits_on_node(&self, node: usize) -> usize {
        self.qregs.iter().filter(|r| r.node == node).map(|r| r.size).sum()
    }

    /// Dense per-node qubit index for a reference: registers are laid out on
    /// each node in declaration order.
    pub fn local_index(&self, q: &QubitRef) -> usize {
        let mut base = 0;
        for reg in &self.qregs {
            if reg.node != q.home_node {
                continue;
            }
            if reg.name == q.register {
                return base + q.offset;
            }
            base += reg.size;
        }
        unreachable!("unresolved qubit reference {q:?}")
    }

    /// Walk all statements, including remote-block bodies, in program order.
    pub fn for_each_stmt<'a>(&'a self, mut f: impl FnMut(&'a Stmt)) {
        fn walk<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
            for s in stmts {
                if let Stmt::RemoteBlock { body, .. } = s {
                    walk(body, f);
                } else {
                    f(s);
                }
            }
        }
        walk(&self.stmts, &mut f);
    }
}
