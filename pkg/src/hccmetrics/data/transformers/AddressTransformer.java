public class AddressTransformer {
    public String transformAddress(Address address) {
        return "The address will be delivered to the following address: "
                + address.getNumber() + " " + address.getStreet() +", " + address.getCity() + ", "
                + address.getCountry() + "\n";
    }
}
