"""Service layer: ADAPT driver, experiment harness, fitting, storage and plotting."""
