from argparse import ArgumentParser

def add_arguments_from_dict(parser: ArgumentParser, parser_config: dict):
    """
    Add the arguments listed in `parser_config` to the `parser`

    The key "()" is skipped. The other keys are the names of the arguments and
    their values are the keyword arguments of `ArgumentParser.add_argument()`.
    If "name_or_flags" is specified in the value, it is passed to
    `add_argument()` instead of the key. The value of "name_or_flags" must be
    a tuple.
    """
    for arg_name in parser_config.keys():
        if arg_name != "()":
            arg_config = parser_config[arg_name].copy()

            name_or_flag = arg_config.pop("name_or_flags", None)
            if not name_or_flag:
                name_or_flag = (arg_name, )

            parser.add_argument(*name_or_flag, **arg_config)

def add_subparsers_from_dict(parser: ArgumentParser, subparser_configs: dict,
        dest: str = "command"):
    """
    Add one subcommand to the `parser` per entry of `subparser_configs`

    @param subparser_configs A dict of which the key is the name of the
           subcommand and the value is its `parser_config`. The key "()" of a
           `parser_config` carries the keyword arguments of `add_parser()`,
           the remaining keys are handled by `add_arguments_from_dict()`.
           An example of `subparser_configs`:
           ```
            {
                "simulate": {
                    "()": {
                        "help": "fly one mission"
                    },
                    "config": {
                        "help": "the mission config file"
                    },
                    "--seed": {
                        "type": int,
                        "help": "override the mission seed"
                    },
                },
            }
           ```
    @return The created subparsers action
    """
    subparsers = parser.add_subparsers(dest = dest, metavar = "<{}>".format(dest))
    for name, parser_config in subparser_configs.items():
        subparser = subparsers.add_parser(name, **parser_config.get("()", {}))
        add_arguments_from_dict(subparser, parser_config)

    return subparsers
