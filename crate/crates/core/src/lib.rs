pub mod ensembles;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod linalg;
pub mod measurement;
pub mod optimize;
pub mod quantifiers;
pub mod quantinfo;
pub mod report;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fock.md")]
    mod fock {}
    #[doc = include_str!("../../../book/src/information.md")]
    mod information {}
    #[doc = include_str!("../../../book/src/measurements.md")]
    mod measurements {}
    #[doc = include_str!("../../../book/src/quantifiers.md")]
    mod quantifiers {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/dissipation.md")]
    mod dissipation {}
    #[doc = include_str!("../../../book/src/landscape.md")]
    mod landscape {}
}
