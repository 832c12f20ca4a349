use super::{parse_scenario, NetError, PhysicalNetwork, Scenario};

const NSF: &str = include_str!("../../data/nsf.scn");
const CORONET: &str = include_str!("../../data/coronet.scn");

/// Shipped scenario file for a named topology (`nsf` or `coronet`).
pub fn builtin_scenario(name: &str) -> Result<Scenario, NetError> {
    match name.to_ascii_lowercase().as_str() {
        "nsf" => parse_scenario(NSF),
        "coronet" => parse_scenario(CORONET),
        _ => Err(NetError::UnknownTopology(name.to_string())),
    }
}

pub fn builtin_topology(name: &str) -> Result<PhysicalNetwork, NetError> {
    builtin_scenario(name).map(|s| s.network)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nsf_shape() {
        let net = builtin_topology("nsf").unwrap();
        assert_eq!((net.len(), net.edges().len()), (14, 21));
        assert!(net.is_two_connected());
        assert_eq!(builtin_scenario("nsf").unwrap().demands.len(), 6);
    }

    #[test]
    fn coronet_shape() {
        let net = builtin_topology("coronet").unwrap();
        assert_eq!((net.len(), net.edges().len()), (75, 99));
        assert!((net.mean_degree() - 2.64).abs() < 1e-12);
        assert!(net.is_two_connected());
    }

    #[test]
    fn unknown_name() {
        assert_eq!(
            builtin_topology("abilene"),
            Err(NetError::UnknownTopology("abilene".into()))
        );
    }
}
