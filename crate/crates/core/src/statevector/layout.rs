use std::ops::Range;

use super::{max_qubits, StateError};

/// A named group of contiguous qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub width: usize,
}

/// Bit position and width of one register inside a basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterField {
    pub shift: usize,
    pub width: usize,
}

impl RegisterField {
    pub fn mask(&self) -> usize {
        ((1usize << self.width) - 1) << self.shift
    }

    pub fn get(&self, index: usize) -> u64 {
        ((index >> self.shift) & ((1usize << self.width) - 1)) as u64
    }

    /// `index` with this register's bits replaced by `value`.
    pub fn set(&self, index: usize, value: u64) -> usize {
        (index & !self.mask()) | ((value as usize) << self.shift)
    }

    /// `index` with `value` XORed into this register's bits.
    pub fn xor(&self, index: usize, value: u64) -> usize {
        index ^ ((value as usize) << self.shift)
    }
}

/// Ordered registers making up a basis index.
///
/// The first register occupies the most significant bits of the index, the
/// last register the least significant. Inside a register the first bit of
/// the stored value is the most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total_width: usize,
}

impl RegisterLayout {
    /// Builds a layout checked against [`max_qubits`].
    pub fn new<I, S>(registers: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::with_limit(registers, max_qubits())
    }

    pub fn with_limit<I, S>(registers: I, max_width: usize) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Register> = Vec::new();
        for (name, width) in registers {
            let name = name.into();
            if width == 0 {
                return Err(StateError::ZeroWidth(name));
            }
            if out.iter().any(|r| r.name == name) {
                return Err(StateError::DuplicateRegister(name));
            }
            out.push(Register { name, width });
        }
        if out.is_empty() {
            return Err(StateError::EmptyRegisterSet);
        }
        let total_width = out.iter().map(|r| r.width).sum();
        if total_width > max_width {
            return Err(StateError::TooManyQubits { total: total_width, max: max_width });
        }
        Ok(Self { registers: out, total_width })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn total_width(&self) -> usize {
        self.total_width
    }

    /// Number of basis states, `2^total_width`.
    pub fn dim(&self) -> usize {
        1usize << self.total_width
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|r| r.name == name)
    }

    fn position(&self, name: &str) -> Result<usize, StateError> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| StateError::UnknownRegister(name.to_string()))
    }

    pub fn width(&self, name: &str) -> Result<usize, StateError> {
        Ok(self.registers[self.position(name)?].width)
    }

    pub fn field(&self, name: &str) -> Result<RegisterField, StateError> {
        let pos = self.position(name)?;
        let shift = self.registers[pos + 1..].iter().map(|r| r.width).sum();
        Ok(RegisterField { shift, width: self.registers[pos].width })
    }

    /// Global qubit indices of a register. Qubit 0 is the most significant
    /// bit of the first register.
    pub fn qubits(&self, name: &str) -> Result<Range<usize>, StateError> {
        let pos = self.position(name)?;
        let start: usize = self.registers[..pos].iter().map(|r| r.width).sum();
        Ok(start..start + self.registers[pos].width)
    }

    /// Bit position inside a basis index of global qubit `q`.
    pub fn qubit_shift(&self, q: usize) -> usize {
        self.total_width - 1 - q
    }

    /// Basis index for the given register values; unnamed registers are 0.
    pub fn index_of(&self, values: &[(&str, u64)]) -> Result<usize, StateError> {
        let mut index = 0usize;
        for &(name, value) in values {
            let field = self.field(name)?;
            if value >> field.width != 0 {
                return Err(StateError::ValueOutOfRange { register: name.to_string(), value });
            }
            index = field.set(index, value);
        }
        Ok(index)
    }

    pub(crate) fn with_appended(&self, name: &str, width: usize) -> Result<Self, StateError> {
        if self.contains(name) {
            return Err(StateError::DuplicateRegister(name.to_string()));
        }
        let regs = self
            .registers
            .iter()
            .map(|r| (r.name.clone(), r.width))
            .chain(std::iter::once((name.to_string(), width)));
        Self::new(regs)
    }

    pub(crate) fn without(&self, name: &str) -> Result<Self, StateError> {
        self.position(name)?;
        Self::with_limit(
            self.registers.iter().filter(|r| r.name != name).map(|r| (r.name.clone(), r.width)),
            usize::MAX,
        )
    }

    pub(crate) fn renamed(&self, from: &str, to: &str) -> Result<Self, StateError> {
        let pos = self.position(from)?;
        if from != to && self.contains(to) {
            return Err(StateError::DuplicateRegister(to.to_string()));
        }
        let mut out = self.clone();
        out.registers[pos].name = to.to_string();
        Ok(out)
    }

    pub(crate) fn pairs(&self) -> Vec<(String, usize)> {
        self.registers.iter().map(|r| (r.name.clone(), r.width)).collect()
    }
}
