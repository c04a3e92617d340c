# Resources shared by the CLI and the verification sweep assets
